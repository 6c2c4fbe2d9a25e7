#include <doctest.h>

#include <cmath>
#include <random>

#include "nmr/autodiff/ops.hpp"
#include "nmr/encodings/hash_grid.hpp"
#include "nmr/encodings/sh.hpp"
#include "support/gradcheck.hpp"

using namespace nmr;
using TD = ad::Tensor<double>;

namespace {

enc::HashGridConfig small_grid() {
  enc::HashGridConfig c;
  c.levels = 4;
  c.features = 2;
  c.log2_table_size = 6;
  c.base_resolution = 2;
  c.max_resolution = 16;
  return c;
}

TD random_points(std::size_t n, std::uint64_t seed, double lo = -1.2, double hi = 1.2) {
  return TD({n, 3}, testing::uniform_values(n * 3, seed, lo, hi), false);
}

// Real SH with the Condon-Shortley phase, from associated Legendre functions.
double sh_oracle(int l, int m, double x, double y, double z) {
  const double theta = std::acos(std::clamp(z, -1.0, 1.0));
  const double phi = std::atan2(y, x);
  const int am = std::abs(m);
  const double K = std::sqrt((2 * l + 1) / (4 * M_PI) * std::tgamma(l - am + 1) / std::tgamma(l + am + 1));
  const double P = (am % 2 ? -1.0 : 1.0) * std::assoc_legendre(l, am, std::cos(theta));
  if (m == 0) return K * P;
  if (m > 0) return std::sqrt(2.0) * K * std::cos(m * phi) * P;
  return std::sqrt(2.0) * K * std::sin(am * phi) * P;
}

void expect_grad_ok(const testing::GradCheckReport& r) {
  INFO(r.worst);
  CHECK(r.compared > 0);
  CHECK(r.max_rel_error < 1e-5);
  CHECK(r.max_abs_error_small < 1e-7);
}

}  // namespace

TEST_CASE("hash grid level resolutions") {
  const enc::HashGridConfig cfg;
  const auto r = enc::level_resolutions(cfg);
  REQUIRE(r.size() == 16);
  CHECK(r.front() == 16);
  CHECK(r[1] == 22);
  CHECK(r[2] == 30);
  CHECK(r.back() == 2048);
  for (std::size_t l = 1; l < r.size(); ++l) CHECK(r[l] > r[l - 1]);
  CHECK(std::exp(std::log(2048.0 / 16) / 15) == doctest::Approx(1.3819).epsilon(1e-4));
}

TEST_CASE("hash grid dimensions, init range and indexing mode") {
  enc::HashGrid<float> g({}, 3);
  CHECK(g.output_dim() == 32);
  CHECK(g.table().shape() == ad::Shape{16u * 32768u, 2u});
  for (float v : g.table().data()) REQUIRE(std::abs(v) <= 1e-4f);
  // (N + 1)^3 <= 2^15 holds for N = 16, 22, 30 only.
  CHECK_FALSE(g.level_is_hashed(0));
  CHECK_FALSE(g.level_is_hashed(2));
  CHECK(g.level_is_hashed(3));
  // Direct levels are collision-free.
  std::vector<char> seen(32768, 0);
  for (std::uint32_t z = 0; z <= 16; ++z)
    for (std::uint32_t y = 0; y <= 16; ++y)
      for (std::uint32_t x = 0; x <= 16; ++x) {
        const auto row = g.entry_row(0, {x, y, z});
        REQUIRE(row < 32768);
        REQUIRE_FALSE(seen[row]);
        seen[row] = 1;
      }
  // Hashed level: XOR of prime-multiplied coordinates modulo T, offset by level.
  const std::uint32_t c[3] = {5, 17, 40};
  const std::uint32_t h = (c[0] * 2654435761u ^ c[1] * 805459861u ^ c[2] * 3674653429u) % 32768u;
  CHECK(g.entry_row(5, {5, 17, 40}) == 5u * 32768u + h);
}

TEST_CASE("hash encode: zero tables give zero output, determinism, reference agreement") {
  enc::HashGrid<double> g({}, 1);
  const auto x = random_points(300, 2, -1.6, 1.6);
  auto a = g.encode(x), b = g.encode(x);
  CHECK(a.shape() == ad::Shape{300, 32});
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a.at(i) == b.at(i));
  std::vector<std::array<double, 3>> pts(300);
  for (std::size_t i = 0; i < 300; ++i) pts[i] = {x.at(i * 3), x.at(i * 3 + 1), x.at(i * 3 + 2)};
  const auto ref = enc::reference::hash_encode(g, pts);
  for (std::size_t i = 0; i < ref.size(); ++i) REQUIRE(a.at(i) == doctest::Approx(ref[i]).epsilon(1e-12));

  for (auto& v : g.table().mutable_data()) v = 0;
  for (double v : g.encode(x).data()) REQUIRE(v == 0.0);
}

TEST_CASE("hash encode interpolates lattice values exactly at corners") {
  enc::HashGrid<double> g(small_grid(), 4);
  // At a lattice point of level 0 (N = 2, spacing 1.5) the level-0 output is
  // that corner's entry.
  TD x({1, 3}, {0.0, -1.5, 1.5}, false);
  const auto y = g.encode(x);
  const auto row = g.entry_row(0, {1, 0, 2});
  CHECK(y.at(0) == doctest::Approx(g.table().at(row * 2)));
  CHECK(y.at(1) == doctest::Approx(g.table().at(row * 2 + 1)));
}

TEST_CASE("hash encode is continuous inside a cell") {
  enc::HashGrid<double> g({}, 5);
  for (auto& v : g.table().mutable_data()) v *= 1e4;  // entries O(1)
  const auto x = random_points(50, 6);
  auto xp = x.clone();
  for (auto& v : xp.mutable_data()) v += 1e-6;
  const auto a = g.encode(x), b = g.encode(xp);
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.at(i) - b.at(i)));
  // Per axis the slope is at most 2 max|entry| N_max / extent; entries are <= 1.
  CHECK(worst < 3 * 1e-6 * 2 * 2048 / 3.0);
  CHECK(worst > 0);
}

TEST_CASE("hash encode gradients match finite differences") {
  SUBCASE("table entries") {
    enc::HashGrid<double> g(small_grid(), 9);
    const auto x = random_points(200, 10);
    testing::GradCheckOptions opt;
    opt.max_entries_per_param = 256;
    auto r = testing::check_gradients({g.table()}, [&] { return testing::contract(g.encode(x), 11); }, opt);
    expect_grad_ok(r);
  }
  SUBCASE("points") {
    enc::HashGrid<double> g(small_grid(), 12);
    for (auto& v : g.table().mutable_data()) v *= 1e4;
    auto x = testing::random_tensor({20, 3}, 13, -1.0, 1.0);
    auto r = testing::check_gradients({x}, [&] { return testing::contract(g.encode(x), 14); });
    expect_grad_ok(r);
  }
  SUBCASE("clamped points get zero gradient") {
    enc::HashGrid<double> g(small_grid(), 15);
    TD x({1, 3}, {2.0, -3.0, 0.1}, true);
    ad::Tape<double> tape;
    {
      ad::Tape<double>::Scope s(tape);
      tape.backward(testing::contract(g.encode(x), 16));
    }
    CHECK(x.grad()[0] == 0.0);
    CHECK(x.grad()[1] == 0.0);
    CHECK(x.grad()[2] != 0.0);
  }
}

TEST_CASE("sh encode values") {
  CHECK(enc::kShDim == 16);
  TD z({1, 3}, {0, 0, 1}, false);
  const auto e = enc::sh_encode(z);
  REQUIRE(e.shape() == ad::Shape{1, 16});
  CHECK(e.at(0) == doctest::Approx(0.282095).epsilon(1e-6));
  CHECK(e.at(1) == 0.0);
  CHECK(e.at(3) == 0.0);
  CHECK(e.at(2) == doctest::Approx(std::sqrt(3 / (4 * M_PI))));
  CHECK(e.at(2) == doctest::Approx(0.488603).epsilon(1e-6));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 100; ++t) {
    double v[3] = {n01(rng), n01(rng), n01(rng)};
    const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (auto& c : v) c /= len;
    TD d({2, 3}, {v[0], v[1], v[2], -v[0], -v[1], -v[2]}, false);
    const auto s = enc::sh_encode(d);
    for (int l = 0; l < 4; ++l) {
      for (int m = -l; m <= l; ++m) {
        const int k = l * l + l + m;
        REQUIRE(s.at(k) == doctest::Approx(sh_oracle(l, m, v[0], v[1], v[2])).epsilon(1e-10));
        const double parity = l % 2 ? -1.0 : 1.0;
        REQUIRE(s.at(16 + k) == doctest::Approx(parity * s.at(k)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("sh encode normalizes non-unit input and counts a warning") {
  enc::reset_sh_warning_count();
  TD d({2, 3}, {0, 0, 2, 0.6, 0.8, 0}, false);
  const auto s = enc::sh_encode(d);
  CHECK(enc::sh_warning_count() == 1);
  CHECK(s.at(2) == doctest::Approx(0.488603).epsilon(1e-6));
}

TEST_CASE("sh encode gradient matches finite differences") {
  auto d = testing::random_tensor({16, 3}, 21);
  // Unit rows; 1e-5 perturbations stay inside the unit tolerance.
  {
    auto m = d.mutable_data();
    for (std::size_t i = 0; i < 16; ++i) {
      const double len = std::sqrt(m[i * 3] * m[i * 3] + m[i * 3 + 1] * m[i * 3 + 1] + m[i * 3 + 2] * m[i * 3 + 2]);
      for (int a = 0; a < 3; ++a) m[i * 3 + a] /= len;
    }
  }
  auto r = testing::check_gradients({d}, [&] { return testing::contract(enc::sh_encode(d), 22); });
  expect_grad_ok(r);

  // Far from unit length: differentiates through the internal normalization.
  auto raw = testing::random_tensor({16, 3}, 23, 0.5, 2.0);
  auto r2 = testing::check_gradients({raw}, [&] { return testing::contract(enc::sh_encode(raw), 24); });
  expect_grad_ok(r2);
}
