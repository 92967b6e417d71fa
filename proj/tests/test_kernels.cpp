#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "orlicz/kernels.hpp"

using namespace orlicz::kernels;

namespace {

std::vector<const Table*> variants() {
  std::vector<const Table*> v;
  if (auto* t = avx2_table()) v.push_back(t);
  if (auto* t = neon_table()) v.push_back(t);
  return v;
}

}  // namespace

TEST_CASE("active table is one of the variants") {
  const Table& a = active();
  bool known = &a == &scalar_table() || &a == avx2_table() || &a == neon_table();
  CHECK(known);
  MESSAGE("active isa: " << std::string(isa_name(a.isa)));
}

TEST_CASE("scalar reference values") {
  std::vector<double> w{0.25, 0.25, 0.25, 0.25, 1}, v{1, 2, 3, 4, 10};
  CHECK(weighted_sum(w, v) == doctest::Approx(12.5));
  std::vector<std::uint8_t> m{1, 0, 1, 0, 1};
  CHECK(masked_weighted_sum(w, v, m) == doctest::Approx(11));
  std::vector<double> x{0, 1, 2}, c{0, 0.5, 3};
  auto r = affine_max(x, c, 1.0);
  CHECK(r.index == 1);
  CHECK(r.value == doctest::Approx(0.5));
  CHECK_THROWS(weighted_sum(w, x));
}

TEST_CASE("vector variants match scalar bit for bit") {
  auto vs = variants();
  if (vs.empty()) MESSAGE("no vector variant on this machine; scalar only");
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1, 1);
  const Table& S = scalar_table();
  for (const Table* T : vs) {
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 31u, 64u, 1000u, 4097u}) {
      std::vector<double> w(n), v(n), x(n), c(n);
      std::vector<std::uint8_t> m(n);
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = u(rng);
        v[i] = 1e3 * u(rng);
        x[i] = double(i) / 10;
        c[i] = u(rng) * x[i] * x[i];
        m[i] = rng() % 3 != 0;
      }
      CHECK(T->weighted_sum(w.data(), v.data(), n) == S.weighted_sum(w.data(), v.data(), n));
      CHECK(T->masked_weighted_sum(w.data(), v.data(), m.data(), n) ==
            S.masked_weighted_sum(w.data(), v.data(), m.data(), n));
      for (double s : {-2.0, 0.0, 0.7, 5.0}) {
        auto a = T->affine_max(x.data(), c.data(), n, s), b = S.affine_max(x.data(), c.data(), n, s);
        CHECK(a.index == b.index);
        if (n) CHECK(a.value == b.value);
      }
    }
  }
}

TEST_CASE("ties and masked-out infinities") {
  std::vector<double> x(9, 1.0), c(9, 0.0);
  std::vector<double> w(8, 1.0), v(8, 1.0);
  v[2] = std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> m(8, 1);
  m[2] = 0;
  const Table& S = scalar_table();
  CHECK(S.affine_max(x.data(), c.data(), 9, 2.0).index == 0);
  CHECK(S.masked_weighted_sum(w.data(), v.data(), m.data(), 8) == 7);
  for (const Table* T : variants()) {
    CHECK(T->affine_max(x.data(), c.data(), 9, 2.0).index == 0);
    CHECK(T->masked_weighted_sum(w.data(), v.data(), m.data(), 8) == 7);
  }
}
