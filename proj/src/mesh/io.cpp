#include "nmr/mesh/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "nmr/mesh/operations.hpp"

namespace nmr::mesh {
namespace {

static_assert(std::endian::native == std::endian::little, "PLY IO assumes a little-endian host");

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

PlyType parse_type(const std::string& s, int line) {
  static const std::map<std::string, PlyType> kTypes = {
      {"char", PlyType::Int8},     {"int8", PlyType::Int8},       {"uchar", PlyType::UInt8},
      {"uint8", PlyType::UInt8},   {"short", PlyType::Int16},     {"int16", PlyType::Int16},
      {"ushort", PlyType::UInt16}, {"uint16", PlyType::UInt16},   {"int", PlyType::Int32},
      {"int32", PlyType::Int32},   {"uint", PlyType::UInt32},     {"uint32", PlyType::UInt32},
      {"float", PlyType::Float32}, {"float32", PlyType::Float32}, {"double", PlyType::Float64},
      {"float64", PlyType::Float64}};
  auto it = kTypes.find(s);
  if (it == kTypes.end()) {
    throw MeshError("ply header line " + std::to_string(line) + ": unknown type '" + s + "'");
  }
  return it->second;
}

std::size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::Float32;
  bool is_list = false;
  PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

/// Sequential reader over either ascii tokens or little-endian binary.
class PlyReader {
 public:
  PlyReader(std::istream& in, bool binary, int first_body_line)
      : in_(in), binary_(binary), line_(first_body_line) {}

  double read(PlyType t) {
    if (binary_) return read_binary(t);
    return read_ascii();
  }

  std::string where() const {
    if (binary_) return "byte offset " + std::to_string(static_cast<long long>(in_.tellg()));
    return "line " + std::to_string(line_);
  }

 private:
  double read_binary(PlyType t) {
    unsigned char buf[8];
    const auto n = type_size(t);
    const auto offset = static_cast<long long>(in_.tellg());
    if (!in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n))) {
      throw MeshError("ply: unexpected end of file at byte offset " + std::to_string(offset));
    }
    switch (t) {
      case PlyType::Int8: return static_cast<std::int8_t>(buf[0]);
      case PlyType::UInt8: return buf[0];
      case PlyType::Int16: { std::int16_t v; std::memcpy(&v, buf, 2); return v; }
      case PlyType::UInt16: { std::uint16_t v; std::memcpy(&v, buf, 2); return v; }
      case PlyType::Int32: { std::int32_t v; std::memcpy(&v, buf, 4); return v; }
      case PlyType::UInt32: { std::uint32_t v; std::memcpy(&v, buf, 4); return v; }
      case PlyType::Float32: { float v; std::memcpy(&v, buf, 4); return v; }
      case PlyType::Float64: { double v; std::memcpy(&v, buf, 8); return v; }
    }
    return 0.0;
  }

  double read_ascii() {
    while (!(tokens_ >> token_)) {
      std::string line;
      if (!std::getline(in_, line)) {
        throw MeshError("ply: unexpected end of file at line " + std::to_string(line_));
      }
      ++line_;
      tokens_.clear();
      tokens_.str(line);
    }
    char* end = nullptr;
    const double v = std::strtod(token_.c_str(), &end);
    if (end == token_.c_str() || *end != '\0') {
      throw MeshError("ply: malformed number '" + token_ + "' at line " + std::to_string(line_));
    }
    return v;
  }

  std::istream& in_;
  bool binary_;
  int line_;
  std::istringstream tokens_;
  std::string token_;
};

TriangleMesh load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MeshError("cannot open " + path.string());
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line() || line != "ply") throw MeshError(path.string() + ": line 1: missing 'ply' magic");
  bool binary = false;
  std::vector<PlyElement> elements;
  bool saw_format = false;
  while (true) {
    if (!next_line()) throw MeshError(path.string() + ": header ends before end_header");
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "end_header") break;
    if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        binary = false;
      } else if (fmt == "binary_little_endian") {
        binary = true;
      } else {
        throw MeshError(path.string() + ": line " + std::to_string(lineno) +
                        ": unsupported format '" + fmt + "'");
      }
      saw_format = true;
    } else if (kw == "element") {
      PlyElement e;
      long long count = -1;
      ls >> e.name >> count;
      if (count < 0) {
        throw MeshError(path.string() + ": line " + std::to_string(lineno) + ": bad element count");
      }
      e.count = static_cast<std::size_t>(count);
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) {
        throw MeshError(path.string() + ": line " + std::to_string(lineno) +
                        ": property before any element");
      }
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = parse_type(ct, lineno);
        p.type = parse_type(it, lineno);
      } else {
        p.type = parse_type(t, lineno);
        ls >> p.name;
      }
      elements.back().props.push_back(p);
    } else {
      throw MeshError(path.string() + ": line " + std::to_string(lineno) + ": unexpected '" +
                      kw + "' in header");
    }
  }
  if (!saw_format) throw MeshError(path.string() + ": header has no format line");

  TriangleMesh mesh;
  PlyReader reader(in, binary, lineno);
  for (const auto& e : elements) {
    if (e.name == "vertex") {
      std::map<std::string, std::size_t> slot;
      for (std::size_t i = 0; i < e.props.size(); ++i) slot[e.props[i].name] = i;
      for (const char* req : {"x", "y", "z"}) {
        if (!slot.count(req)) throw MeshError(path.string() + ": vertex element lacks '" + std::string(req) + "'");
      }
      const bool normals = slot.count("nx") && slot.count("ny") && slot.count("nz");
      const bool colors = slot.count("red") && slot.count("green") && slot.count("blue");
      std::vector<std::size_t> feat_slots;
      for (std::size_t k = 0;; ++k) {
        auto it = slot.find("feat_" + std::to_string(k));
        if (it == slot.end()) break;
        feat_slots.push_back(it->second);
      }
      mesh.vertices.resize(e.count);
      if (normals) mesh.normals.resize(e.count);
      if (colors) mesh.colors.resize(e.count);
      mesh.feature_dim = feat_slots.size();
      mesh.features.resize(e.count * feat_slots.size());
      std::vector<double> vals(e.props.size());
      for (std::size_t v = 0; v < e.count; ++v) {
        for (std::size_t i = 0; i < e.props.size(); ++i) {
          if (e.props[i].is_list) {
            const auto n = static_cast<std::size_t>(reader.read(e.props[i].count_type));
            for (std::size_t k = 0; k < n; ++k) reader.read(e.props[i].type);
            vals[i] = 0.0;
          } else {
            vals[i] = reader.read(e.props[i].type);
          }
        }
        mesh.vertices[v] = {vals[slot["x"]], vals[slot["y"]], vals[slot["z"]]};
        if (normals) mesh.normals[v] = {vals[slot["nx"]], vals[slot["ny"]], vals[slot["nz"]]};
        if (colors) {
          const bool bytes = e.props[slot["red"]].type == PlyType::UInt8;
          const double s = bytes ? 1.0 / 255.0 : 1.0;
          mesh.colors[v] = {vals[slot["red"]] * s, vals[slot["green"]] * s, vals[slot["blue"]] * s};
        }
        for (std::size_t k = 0; k < feat_slots.size(); ++k) {
          mesh.features[v * feat_slots.size() + k] = static_cast<float>(vals[feat_slots[k]]);
        }
      }
    } else if (e.name == "face") {
      mesh.faces.reserve(e.count);
      for (std::size_t f = 0; f < e.count; ++f) {
        for (const auto& p : e.props) {
          if (!p.is_list) {
            reader.read(p.type);
            continue;
          }
          const auto where = reader.where();
          const auto n = static_cast<long long>(reader.read(p.count_type));
          std::vector<long long> idx(static_cast<std::size_t>(std::max(0LL, n)));
          for (auto& i : idx) i = static_cast<long long>(reader.read(p.type));
          if (p.name != "vertex_indices" && p.name != "vertex_index") continue;
          if (n < 3) {
            throw MeshError(path.string() + ": face " + std::to_string(f) + " at " + where +
                            " has fewer than 3 vertices");
          }
          for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
            for (auto i : {idx[0], idx[k], idx[k + 1]}) {
              if (i < 0) {
                throw MeshError(path.string() + ": face " + std::to_string(f) +
                                " has negative vertex index " + std::to_string(i));
              }
            }
            mesh.faces.push_back({static_cast<std::uint32_t>(idx[0]),
                                  static_cast<std::uint32_t>(idx[k]),
                                  static_cast<std::uint32_t>(idx[k + 1])});
          }
        }
      }
    } else {
      for (std::size_t i = 0; i < e.count; ++i) {
        for (const auto& p : e.props) {
          if (p.is_list) {
            const auto n = static_cast<std::size_t>(reader.read(p.count_type));
            for (std::size_t k = 0; k < n; ++k) reader.read(p.type);
          } else {
            reader.read(p.type);
          }
        }
      }
    }
  }
  try {
    mesh.validate();
  } catch (const MeshError& e) {
    throw MeshError(path.string() + ": " + e.what());
  }
  return mesh;
}

TriangleMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open " + path.string());
  TriangleMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw) || kw[0] == '#') continue;
    if (kw == "v") {
      Vec3 p;
      if (!(ls >> p[0] >> p[1] >> p[2])) {
        throw MeshError(path.string() + ": line " + std::to_string(lineno) + ": malformed vertex");
      }
      mesh.vertices.push_back(p);
    } else if (kw == "f") {
      std::vector<long long> idx;
      std::string tok;
      while (ls >> tok) {
        const auto slash = tok.find('/');
        const std::string head = tok.substr(0, slash);
        char* end = nullptr;
        const long long i = std::strtoll(head.c_str(), &end, 10);
        if (head.empty() || *end != '\0' || i == 0) {
          throw MeshError(path.string() + ": line " + std::to_string(lineno) +
                          ": malformed face index '" + tok + "'");
        }
        const long long nv = static_cast<long long>(mesh.vertices.size());
        const long long zero_based = i > 0 ? i - 1 : nv + i;
        if (zero_based < 0) {
          throw MeshError(path.string() + ": line " + std::to_string(lineno) +
                          ": face index " + tok + " out of range");
        }
        idx.push_back(zero_based);
      }
      if (idx.size() < 3) {
        throw MeshError(path.string() + ": line " + std::to_string(lineno) +
                        ": face with fewer than 3 vertices");
      }
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        mesh.faces.push_back({static_cast<std::uint32_t>(idx[0]), static_cast<std::uint32_t>(idx[k]),
                              static_cast<std::uint32_t>(idx[k + 1])});
      }
    }
  }
  try {
    mesh.validate();
  } catch (const MeshError& e) {
    throw MeshError(path.string() + ": " + e.what());
  }
  return mesh;
}

template <typename V>
void put(std::ostream& out, V v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

std::uint8_t to_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

std::string lower_ext(const std::filesystem::path& p) {
  auto e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

}  // namespace

void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path) {
  mesh.validate();
  std::vector<Vec3> normals = mesh.normals;
  if (normals.empty()) normals = vertex_normals(mesh).normals;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MeshError("cannot write " + path.string());
  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  for (const char* p : {"x", "y", "z", "nx", "ny", "nz"}) out << "property float " << p << "\n";
  for (const char* p : {"red", "green", "blue"}) out << "property uchar " << p << "\n";
  const auto fd = mesh.has_features() ? mesh.feature_dim : 0;
  for (std::size_t k = 0; k < fd; ++k) out << "property float feat_" << k << "\n";
  out << "element face " << mesh.faces.size() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    for (int j = 0; j < 3; ++j) put(out, static_cast<float>(mesh.vertices[v][j]));
    for (int j = 0; j < 3; ++j) put(out, static_cast<float>(normals[v][j]));
    const Vec3 c = mesh.has_colors() ? mesh.colors[v] : Vec3::Constant(0.5);
    for (int j = 0; j < 3; ++j) put(out, to_byte(c[j]));
    for (std::size_t k = 0; k < fd; ++k) put(out, mesh.features[v * fd + k]);
  }
  for (const auto& f : mesh.faces) {
    put(out, std::uint8_t{3});
    for (auto i : f) put(out, static_cast<std::int32_t>(i));
  }
  if (!out) throw MeshError("write failed for " + path.string());
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  const auto ext = lower_ext(path);
  if (ext == ".ply") return load_ply(path);
  if (ext == ".obj") return load_obj(path);
  throw MeshError(path.string() + ": unsupported mesh extension '" + ext + "'");
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
  const auto ext = lower_ext(path);
  if (ext != ".ply") throw MeshError(path.string() + ": meshes are written as .ply");
  save_ply(mesh, path);
}

}  // namespace nmr::mesh
