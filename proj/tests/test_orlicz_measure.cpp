#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "orlicz/errors.hpp"
#include "orlicz/orlicz_measure.hpp"

using namespace orlicz;

namespace {

// plain bisection on the defining equation, linear channel
double norm_oracle(const NFunction& phi, const SampledDensity& F) {
  auto M = [&](double b) {
    double s = 0;
    for (std::size_t i = 0; i < F.size(); ++i) s += F.weights()[i] * phi.eval(F.values()[i] / b);
    return s;
  };
  double lo = 1e-6, hi = 1e6;
  for (int k = 0; k < 200; ++k) {
    double mid = std::sqrt(lo * hi);
    (M(mid) > 1 ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

SampledDensity random_density(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0, 3);
  std::vector<double> v(n), w(n);
  double sw = 0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = u(rng);
    w[i] = 0.5 + u(rng);
    sw += w[i];
  }
  for (double& x : w) x /= sw;
  // absorb the rounding into the last weight
  double s = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) s += w[i];
  w[n - 1] = 1 - s;
  return SampledDensity(v, w);
}

}  // namespace

TEST_CASE("density validation") {
  CHECK_THROWS_AS(SampledDensity({1, -1}, {0.5, 0.5}), DataError);
  CHECK_THROWS_AS(SampledDensity({1, 1}, {0.5, 0.6}), DataError);
  CHECK_THROWS_AS(SampledDensity({1, NAN}, {0.5, 0.5}), DataError);
  CHECK_THROWS_AS(SampledDensity({1, 1}, {1.0, 0.0}), DataError);
  CHECK_THROWS_AS(SampledDensity({2, 2}, {0.5, 0.5}, true), DataError);
  auto F = SampledDensity::uniform({1, 3}, false);
  CHECK(F.mass() == doctest::Approx(2));
  CHECK(F.measure({1, 0}) == doctest::Approx(0.5));
  CHECK(F.masked_mass({0, 1}) == doctest::Approx(1.5));
}

TEST_CASE("luxemburg norm of constants") {
  auto F1 = SampledDensity::uniform(std::vector<double>(10, 1.0), true);
  auto p2 = NFunction::power_law(2);
  CHECK(luxemburg_norm(p2, F1) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  for (auto phi : {NFunction::power_law(1.5), NFunction::exp_minus(1), NFunction::log_product({1, 3})}) {
    double expect = 1 / phi.eval_inverse(1.0);
    CHECK(std::fabs(luxemburg_norm(phi, F1) / expect - 1) <= 1e-10);
  }
  CHECK(luxemburg_norm(p2, SampledDensity::uniform({0, 0, 0})) == 0);
}

TEST_CASE("norm against a bisection oracle and homogeneity") {
  std::mt19937_64 rng(7);
  for (auto phi : {NFunction::power_law(2), NFunction::power_law(3), NFunction::exp_minus(1),
                   NFunction::log_product({1, 2, 5})}) {
    for (int k = 0; k < 5; ++k) {
      auto F = random_density(rng, 50);
      double b = luxemburg_norm(phi, F);
      CHECK(b == doctest::Approx(norm_oracle(phi, F)).epsilon(1e-9));
      CHECK(modular(phi, F, b) == doctest::Approx(1).epsilon(1e-12));
      CHECK(std::fabs(luxemburg_norm(phi, F.scaled(3)) / (3 * b) - 1) <= 1e-10);
    }
  }
}

TEST_CASE("triangle and Hoelder inequalities") {
  std::mt19937_64 rng(11);
  auto phi = NFunction::power_law(3);
  ConjugatePair pair(phi);
  for (int k = 0; k < 10; ++k) {
    auto F = random_density(rng, 40);
    auto G = SampledDensity(std::vector<double>(F.size()), F.weights());
    std::vector<double> gv(F.size()), sv(F.size());
    std::uniform_real_distribution<double> u(0, 5);
    for (std::size_t i = 0; i < F.size(); ++i) {
      gv[i] = u(rng);
      sv[i] = gv[i] + F.values()[i];
    }
    SampledDensity Gd(gv, F.weights()), S(sv, F.weights());
    CHECK(luxemburg_norm(phi, S) <= luxemburg_norm(phi, F) + luxemburg_norm(phi, Gd) + 1e-12);
    double pairing = 0;
    for (std::size_t i = 0; i < F.size(); ++i) pairing += F.weights()[i] * F.values()[i] * gv[i];
    CHECK(pairing <= 2 * luxemburg_norm(phi, F) * luxemburg_norm_conjugate(pair, Gd) + 1e-12);
  }
}

TEST_CASE("norm from modular") {
  auto p2 = NFunction::power_law(2);
  // F = 2: modular 2, norm sqrt(2)
  auto F = SampledDensity::uniform({2, 2, 2});
  auto r = norm_from_modular(p2, F);
  CHECK(r.modular == doctest::Approx(2));
  CHECK(r.norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.holds);
  // modular exactly 1 gives norm 1
  auto one = SampledDensity::uniform({std::sqrt(2.0)});
  CHECK(norm_from_modular(p2, one).norm == doctest::Approx(1).epsilon(1e-12));
  CHECK_THROWS_AS(norm_from_modular(p2, SampledDensity::uniform({0.1})), PreconditionError);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    auto G = random_density(rng, 30).scaled(4);
    CHECK(norm_from_modular(p2, G).holds);
  }
}

TEST_CASE("young split") {
  ConjugatePair pair(NFunction::power_law(2));
  auto F = SampledDensity::uniform({1, 1, 1, 1}, true);
  std::vector<std::uint8_t> half{1, 1, 0, 0}, none{0, 0, 0, 0}, all{1, 1, 1, 1};
  // inf_eps eps (1 + 0.25 / eps^2) / sqrt 2 = 1/sqrt 2 at eps = 1/2
  auto r = youngsplit_optimal(pair, F, half);
  CHECK(r.epsilon == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.bound == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(r.actual == doctest::Approx(0.5));
  CHECK(r.holds);
  auto z = youngsplit_bound(pair, F, none, 0.3);
  CHECK(z.actual == 0);
  CHECK(z.bound == doctest::Approx(0.3 / std::sqrt(2.0)));
  auto big = youngsplit_bound(pair, F, all, 1e6);
  CHECK(big.bound >= F.mass());
  CHECK_THROWS_AS(youngsplit_bound(pair, F, half, 0), DomainError);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    auto G = random_density(rng, 25);
    std::vector<std::uint8_t> m(G.size());
    for (auto& b : m) b = rng() % 2;
    CHECK(youngsplit_optimal(pair, G, m).holds);
    CHECK(youngsplit_bound(pair, G, m, 0.1 + k).holds);
  }
}

TEST_CASE("tail bound curve") {
  ConjugatePair p2(NFunction::power_law(2));
  auto s = log_grid(1e-2, 1e6, 30);
  auto spike = generate_density(DensitySpec::parse("single-spike:0.3,32"));
  auto curve = tail_bound_curve(p2, spike, s);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    CHECK(curve[i].actual <= curve[i].bound);
    if (i) CHECK(curve[i].bound < curve[i - 1].bound);
  }
  // (Phi*)^{-1}(s) = sqrt(2 s): bound * sqrt(s) is constant
  CHECK(curve[5].bound * std::sqrt(s[5]) == doctest::Approx(curve[20].bound * std::sqrt(s[20])));
  // worst mass on small sets comes from the spike cell
  CHECK(worst_tail_mass(spike, 1.0 / 1024) == doctest::Approx(0.3 + 0.7 / 1024));
  CHECK_THROWS_AS(tail_bound_curve(p2, SampledDensity::uniform({2.0}), s), PreconditionError);
  CHECK(tail_curve_csv(curve).rfind("s,level_measure,bound,actual\n", 0) == 0);
}

TEST_CASE("generators") {
  auto c = generate_density(DensitySpec::parse("constant:1,8"));
  CHECK(c.size() == 64);
  CHECK(c.normalized());
  for (const char* d : {"power-spike:1.2,32", "log-spike:2,32", "random:0.7,9,16", "power-spike:1,8,3"}) {
    auto F = generate_density(DensitySpec::parse(d));
    CHECK(F.normalized());
    CHECK(F.mass() == doctest::Approx(1).epsilon(1e-12));
  }
  CHECK(generate_density(DensitySpec::parse("power-spike:1,8,3")).size() == 512);
  CHECK_THROWS_AS(generate_density(DensitySpec::parse("power-spike:2,16")), ConfigError);
  CHECK_THROWS_AS(generate_density(DensitySpec::parse("log-spike:0")), ConfigError);
  CHECK_THROWS_AS(generate_density(DensitySpec::parse("bogus:1")), ConfigError);
  CHECK_THROWS_AS(DensitySpec::parse("power-spike:x"), ConfigError);
  auto j = DensitySpec::parse("random:0.5,3,16").to_json();
  CHECK(j["seed"] == 3);
  CHECK(DensitySpec::from_json(j).grid == 16);
  // the spike's top cell is the largest value
  auto F = generate_density(DensitySpec::parse("power-spike:1,16"));
  double mx = *std::max_element(F.values().begin(), F.values().end());
  CHECK(mx == doctest::Approx(F.values()[8 * 16 + 8]).epsilon(1e-12));
}

TEST_CASE("refinement verdict matches p gamma < dim") {
  struct Case {
    double p, gamma;
  };
  for (Case k : {Case{2, 0.5}, Case{2, 1.5}, Case{3, 0.4}, Case{3, 0.9}, Case{1.5, 1.0}}) {
    DensitySpec s;
    s.kind = "power-spike";
    s.gamma = k.gamma;
    s.grid = 32;
    auto v = norm_under_refinement(NFunction::power_law(k.p), s);
    CHECK_MESSAGE(v.bounded == power_spike_in_Lp(k.p, k.gamma, 2), "p=" << k.p << " gamma=" << k.gamma
                                                                          << " ratio=" << v.last_ratio);
  }
  // log spikes stay bounded for a log-type Young function
  DensitySpec l;
  l.kind = "log-spike";
  l.gamma = 2;
  l.grid = 32;
  CHECK(norm_under_refinement(NFunction::log_product({1, 2}), l).bounded);
}

TEST_CASE("csv round trip") {
  auto F = generate_density(DensitySpec::parse("random:0.3,4,4"));
  auto path = (std::filesystem::temp_directory_path() / "orlicz_density_test.csv").string();
  F.write_csv(path);
  auto G = SampledDensity::from_csv(path, true);
  REQUIRE(G.size() == F.size());
  for (std::size_t i = 0; i < F.size(); ++i) CHECK(G.values()[i] == doctest::Approx(F.values()[i]).epsilon(1e-14));
  std::filesystem::remove(path);
  CHECK(load_density("constant:2,4").values()[0] == 2);
}
