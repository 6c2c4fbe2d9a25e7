#include "nmr/fields/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace nmr::fields {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

class Reader {
 public:
  Reader(std::vector<char> bytes, std::string name) : bytes_(std::move(bytes)), name_(std::move(name)) {}

  void read(void* dst, std::size_t n, const char* what) {
    if (pos_ + n > bytes_.size()) {
      throw CheckpointError(name_ + ": truncated at byte offset " + std::to_string(pos_) + " while reading " +
                            what + " (" + std::to_string(n) + " bytes needed, " +
                            std::to_string(bytes_.size() - pos_) + " left)");
    }
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    read(&v, 4, what);
    return v;
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::vector<char> bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out.write(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(ckpt.size()));
  for (const auto& [name, rec] : ckpt) {
    std::size_t n = 1;
    for (auto d : rec.dims) n *= d;
    if (n != rec.data.size()) throw CheckpointError("record '" + name + "' dims do not match its payload");
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(rec.dims.size()));
    for (auto d : rec.dims) put_u32(out, d);
    out.write(reinterpret_cast<const char*>(rec.data.data()), static_cast<std::streamsize>(rec.data.size() * 4));
  }
  if (!out) throw CheckpointError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}), path.string());
  char magic[4];
  r.read(magic, 4, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw CheckpointError(path.string() + ": not a checkpoint (bad magic)");
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.u32("record count");
  Checkpoint ckpt;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = r.u32("name length");
    if (len > 4096) {
      throw CheckpointError(path.string() + ": implausible name length at byte offset " + std::to_string(r.pos() - 4));
    }
    std::string name(len, '\0');
    r.read(name.data(), len, "name");
    TensorRecord rec;
    const auto rank = r.u32("rank");
    if (rank > 8) throw CheckpointError(path.string() + ": record '" + name + "' has rank " + std::to_string(rank));
    std::size_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      rec.dims.push_back(r.u32("dims"));
      n *= rec.dims.back();
    }
    rec.data.resize(n);
    r.read(rec.data.data(), n * 4, ("payload of '" + name + "'").c_str());
    ckpt.emplace(std::move(name), std::move(rec));
  }
  if (!r.done()) throw CheckpointError(path.string() + ": trailing bytes at offset " + std::to_string(r.pos()));
  return ckpt;
}

template <typename T>
void store(Checkpoint& ckpt, const ParamList<T>& params) {
  for (const auto& p : params) {
    TensorRecord rec;
    for (auto d : p.tensor.shape()) rec.dims.push_back(static_cast<std::uint32_t>(d));
    rec.data.assign(p.tensor.data().begin(), p.tensor.data().end());
    ckpt[p.name] = std::move(rec);
  }
}

template <typename T>
void restore(const Checkpoint& ckpt, const ParamList<T>& params) {
  for (const auto& p : params) {
    auto it = ckpt.find(p.name);
    if (it == ckpt.end()) throw CheckpointError("checkpoint has no record '" + p.name + "'");
    ad::Shape shape(it->second.dims.begin(), it->second.dims.end());
    if (shape != p.tensor.shape()) {
      throw CheckpointError("record '" + p.name + "' has shape " + ad::to_string(shape) + ", model expects " +
                            ad::to_string(p.tensor.shape()));
    }
    auto dst = ad::Tensor<T>(p.tensor).mutable_data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(it->second.data[i]);
  }
}

template void store<float>(Checkpoint&, const ParamList<float>&);
template void store<double>(Checkpoint&, const ParamList<double>&);
template void restore<float>(const Checkpoint&, const ParamList<float>&);
template void restore<double>(const Checkpoint&, const ParamList<double>&);

}  // namespace nmr::fields
