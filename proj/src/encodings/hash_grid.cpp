#include "nmr/encodings/hash_grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "nmr/autodiff/ops.hpp"
#include "nmr/kernels/parallel.hpp"

namespace nmr::enc {
namespace {

constexpr std::uint32_t kPrimes[3] = {2654435761u, 805459861u, 3674653429u};

/// Lattice cell and fractional offset of one point at one level.
struct Cell {
  std::uint32_t base[3];
  double frac[3];
  bool inside[3];  // false when the coordinate was clamped
};

Cell locate(const double* p, int res, double bound) {
  Cell c;
  for (int a = 0; a < 3; ++a) {
    double u = (p[a] + bound) / (2.0 * bound);
    c.inside[a] = u >= 0.0 && u <= 1.0;
    u = std::clamp(u, 0.0, 1.0);
    const double pos = u * res;
    const int i0 = std::min(static_cast<int>(std::floor(pos)), res - 1);
    c.base[a] = static_cast<std::uint32_t>(i0);
    c.frac[a] = pos - i0;
  }
  return c;
}

}  // namespace

std::vector<int> level_resolutions(const HashGridConfig& cfg) {
  if (cfg.levels < 1 || cfg.base_resolution < 1 || cfg.max_resolution < cfg.base_resolution) {
    throw std::invalid_argument("hash grid: invalid level/resolution configuration");
  }
  std::vector<int> r(cfg.levels);
  const double b = cfg.levels > 1 ? std::exp(std::log(double(cfg.max_resolution) / cfg.base_resolution) /
                                             (cfg.levels - 1))
                                  : 1.0;
  for (int l = 0; l < cfg.levels; ++l) {
    r[l] = static_cast<int>(std::floor(cfg.base_resolution * std::pow(b, l) + 1e-6));
  }
  return r;
}

template <typename T>
HashGrid<T>::HashGrid(HashGridConfig cfg, std::uint64_t seed)
    : cfg_(cfg), res_(level_resolutions(cfg)) {
  if (cfg.features < 1 || cfg.log2_table_size < 1 || cfg.log2_table_size > 26) {
    throw std::invalid_argument("hash grid: invalid feature count or table size");
  }
  table_ = ad::Tensor<T>::zeros({std::size_t(cfg_.levels) * table_size(), std::size_t(cfg_.features)},
                                true);
  init(seed);
}

template <typename T>
void HashGrid<T>::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1e-4, 1e-4);
  for (auto& v : table_.mutable_data()) v = static_cast<T>(u(rng));
}

template <typename T>
bool HashGrid<T>::level_is_hashed(int level) const {
  const std::uint64_t side = std::uint64_t(res_[level]) + 1;
  return side * side * side > table_size();
}

template <typename T>
std::uint32_t HashGrid<T>::entry_row(int level, const std::array<std::uint32_t, 3>& c) const {
  const std::uint32_t tsize = static_cast<std::uint32_t>(table_size());
  std::uint32_t idx;
  if (level_is_hashed(level)) {
    idx = (c[0] * kPrimes[0] ^ c[1] * kPrimes[1] ^ c[2] * kPrimes[2]) & (tsize - 1);
  } else {
    const std::uint32_t side = static_cast<std::uint32_t>(res_[level]) + 1;
    idx = c[0] + side * (c[1] + side * c[2]);
  }
  return static_cast<std::uint32_t>(level) * tsize + idx;
}

template <typename T>
ad::Tensor<T> HashGrid<T>::encode(const ad::Tensor<T>& x) const {
  if (!x.defined() || x.rank() != 2 || x.dim(1) != 3) {
    throw ad::ShapeError("hash_encode: points must be (n, 3), got " +
                         (x.defined() ? ad::to_string(x.shape()) : std::string("<undefined>")));
  }
  const std::size_t n = x.dim(0);
  const int L = cfg_.levels, F = cfg_.features;
  const std::size_t D = output_dim();
  // Corner rows and trilinear weights, kept for the backward pass.
  auto rows = std::make_shared<std::vector<std::uint32_t>>(n * L * 8);
  auto cells = std::make_shared<std::vector<Cell>>(n * L);
  std::vector<T> out(n * D, T(0));
  const T* tab = table_.data().data();
  const T* xp = x.data().data();
  kernels::parallel_for(n, [&](std::size_t i) {
    const double p[3] = {double(xp[i * 3]), double(xp[i * 3 + 1]), double(xp[i * 3 + 2])};
    for (int l = 0; l < L; ++l) {
      const Cell c = locate(p, res_[l], cfg_.bound);
      (*cells)[i * L + l] = c;
      std::uint32_t* r = rows->data() + (i * L + l) * 8;
      double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
      for (int k = 0; k < 8; ++k) {
        const std::array<std::uint32_t, 3> corner = {c.base[0] + (k & 1), c.base[1] + ((k >> 1) & 1),
                                                     c.base[2] + ((k >> 2) & 1)};
        r[k] = entry_row(l, corner);
        const double w = ((k & 1) ? c.frac[0] : 1 - c.frac[0]) *
                         (((k >> 1) & 1) ? c.frac[1] : 1 - c.frac[1]) *
                         (((k >> 2) & 1) ? c.frac[2] : 1 - c.frac[2]);
        for (int f = 0; f < F; ++f) acc[f] += w * double(tab[std::size_t(r[k]) * F + f]);
      }
      for (int f = 0; f < F; ++f) out[i * D + l * F + f] = static_cast<T>(acc[f]);
    }
  });

  auto tn = table_.node();
  auto xn = x.node();
  const double bound = cfg_.bound;
  auto res = res_;
  return ad::record_op<T>(
      "hash_encode", {n, D}, std::move(out), {table_, x},
      [tn, xn, rows, cells, n, L, F, D, bound, res](const ad::Node<T>& o) {
        const T* g = o.grad.data();
        if (tn->requires_grad) {
          tn->ensure_grad();
          T* gt = tn->grad.data();
          // Each level owns a disjoint slice of the table; points are visited in
          // index order inside a level so accumulation order is fixed.
          kernels::parallel_for_coarse(static_cast<std::size_t>(L), [&](std::size_t l) {
            for (std::size_t i = 0; i < n; ++i) {
              const Cell& c = (*cells)[i * L + l];
              const std::uint32_t* r = rows->data() + (i * L + l) * 8;
              for (int k = 0; k < 8; ++k) {
                const double w = ((k & 1) ? c.frac[0] : 1 - c.frac[0]) *
                                 (((k >> 1) & 1) ? c.frac[1] : 1 - c.frac[1]) *
                                 (((k >> 2) & 1) ? c.frac[2] : 1 - c.frac[2]);
                for (int f = 0; f < F; ++f) {
                  gt[std::size_t(r[k]) * F + f] += static_cast<T>(w * double(g[i * D + l * F + f]));
                }
              }
            }
          });
        }
        if (xn->requires_grad) {
          xn->ensure_grad();
          T* gx = xn->grad.data();
          const T* tab = tn->value.data();
          kernels::parallel_for(n, [&](std::size_t i) {
            double d[3] = {0, 0, 0};
            for (int l = 0; l < L; ++l) {
              const Cell& c = (*cells)[i * L + l];
              const std::uint32_t* r = rows->data() + (i * L + l) * 8;
              const double scale = res[l] / (2.0 * bound);
              for (int k = 0; k < 8; ++k) {
                const int b[3] = {k & 1, (k >> 1) & 1, (k >> 2) & 1};
                double wa[3], dw[3];
                for (int a = 0; a < 3; ++a) {
                  wa[a] = b[a] ? c.frac[a] : 1 - c.frac[a];
                  dw[a] = b[a] ? 1.0 : -1.0;
                }
                double gdot = 0;
                for (int f = 0; f < F; ++f)
                  gdot += double(g[i * D + l * F + f]) * double(tab[std::size_t(r[k]) * F + f]);
                d[0] += gdot * dw[0] * wa[1] * wa[2] * scale * c.inside[0];
                d[1] += gdot * wa[0] * dw[1] * wa[2] * scale * c.inside[1];
                d[2] += gdot * wa[0] * wa[1] * dw[2] * scale * c.inside[2];
              }
            }
            for (int a = 0; a < 3; ++a) gx[i * 3 + a] += static_cast<T>(d[a]);
          });
        }
      });
}

namespace reference {

template <typename T>
std::vector<T> hash_encode(const HashGrid<T>& grid, const std::vector<std::array<double, 3>>& x) {
  const auto& cfg = grid.config();
  const auto D = grid.output_dim();
  const auto tab = grid.table().data();
  std::vector<T> out(x.size() * D);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int l = 0; l < cfg.levels; ++l) {
      const int N = grid.resolutions()[l];
      std::array<double, 3> pos;
      std::array<std::uint32_t, 3> lo;
      for (int a = 0; a < 3; ++a) {
        const double u = std::min(1.0, std::max(0.0, (x[i][a] + cfg.bound) / (2 * cfg.bound)));
        pos[a] = u * N;
        lo[a] = std::min<std::uint32_t>(static_cast<std::uint32_t>(pos[a]), N - 1);
        pos[a] -= lo[a];
      }
      for (int f = 0; f < cfg.features; ++f) {
        double acc = 0;
        for (int dz = 0; dz < 2; ++dz)
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const double w = (dx ? pos[0] : 1 - pos[0]) * (dy ? pos[1] : 1 - pos[1]) *
                               (dz ? pos[2] : 1 - pos[2]);
              const auto row = grid.entry_row(l, {lo[0] + dx, lo[1] + dy, lo[2] + dz});
              acc += w * double(tab[std::size_t(row) * cfg.features + f]);
            }
        out[i * D + l * cfg.features + f] = static_cast<T>(acc);
      }
    }
  }
  return out;
}

template std::vector<float> hash_encode(const HashGrid<float>&, const std::vector<std::array<double, 3>>&);
template std::vector<double> hash_encode(const HashGrid<double>&, const std::vector<std::array<double, 3>>&);

}  // namespace reference

template class HashGrid<float>;
template class HashGrid<double>;

}  // namespace nmr::enc
