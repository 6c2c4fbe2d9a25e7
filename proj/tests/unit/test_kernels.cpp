#include <doctest.h>

#include <random>
#include <vector>

#include "nmr/kernels/gemm.hpp"
#include "nmr/kernels/parallel.hpp"

using namespace nmr::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("gemm matches the serial reference for every transpose combination") {
  const std::size_t m = 37, n = 29, k = 53;
  for (auto ta : {Trans::No, Trans::Yes}) {
    for (auto tb : {Trans::No, Trans::Yes}) {
      auto a = random_vec(m * k, 1);
      auto b = random_vec(k * n, 2);
      auto c0 = random_vec(m * n, 3);
      auto c1 = c0;
      gemm<double>(ta, tb, m, n, k, 0.7, a.data(), b.data(), 0.3, c0.data());
      reference::gemm<double>(ta, tb, m, n, k, 0.7, a.data(), b.data(), 0.3, c1.data());
      for (std::size_t i = 0; i < c0.size(); ++i) CHECK(c0[i] == doctest::Approx(c1[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("gemm with beta zero ignores stale output") {
  std::vector<float> a{1, 2, 3, 4}, b{1, 0, 0, 1}, c{NAN, NAN, NAN, NAN};
  gemm<float>(Trans::No, Trans::No, 2, 2, 2, 1.0f, a.data(), b.data(), 0.0f, c.data());
  CHECK(c == std::vector<float>{1, 2, 3, 4});
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(kParallelThreshold * 3, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
}
