#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "orlicz/errors.hpp"
#include "orlicz/nfunctions.hpp"

using namespace orlicz;

namespace {
const double e = std::exp(1.0);

std::vector<NFunction> builtins() {
  return {NFunction::power_law(1.5),        NFunction::power_law(2),
          NFunction::power_law(3),          NFunction::exp_minus(0.5),
          NFunction::exp_minus(1),          NFunction::exp_minus(2),
          NFunction::log_product({1, 2}),   NFunction::log_product({1, 3, 2}),
          NFunction::log_product({2, 1}),   NFunction::log_product({1, 2, 2, 3}),
          NFunction::log_product({1, 2, 5})};
}
}  // namespace

TEST_CASE("eval examples") {
  CHECK(NFunction::power_law(2).eval(2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(NFunction::exp_minus(1).eval(0) == 0.0);
  CHECK(NFunction::log_product({1, 2}).eval(e - 1) == doctest::Approx(e - 1).epsilon(1e-14));
}

TEST_CASE("eval_inverse examples") {
  CHECK(NFunction::power_law(2).eval_inverse(2) == doctest::Approx(2.0).epsilon(1e-14));
  for (auto& f : builtins()) CHECK(f.eval_inverse(0) == 0.0);
  CHECK(NFunction::exp_minus(1).eval_inverse(e - 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(NFunction::exp_minus(1).eval_inverse(INFINITY), DomainError);
}

TEST_CASE("iterated logs") {
  CHECK(iterated_log(0, 5) == 5);
  CHECK(iterated_log(1, e - 1) == doctest::Approx(1).epsilon(1e-15));
  CHECK(iterated_log(2, std::exp(e - 1) - 1) == doctest::Approx(1).epsilon(1e-14));
  for (int k = 0; k <= 4; ++k)
    for (double t : log_grid(1e-3, 1e3, 61)) {
      double back = iterated_log_inverse(k, iterated_log(k, t));
      CHECK(std::fabs(back / t - 1) < 1e-10);
    }
  try {
    iterated_log_inverse(3, 50);
    FAIL("expected overflow");
  } catch (const OverflowError& err) {
    CHECK(err.partial());
  }
  // log channel agrees with direct recursion where both are representable
  for (double x : {-20.0, -1.0, 0.0, 3.0, 40.0, 300.0})
    for (int k = 1; k <= 3; ++k)
      CHECK(log_iterated_log_of_exp(k, x) ==
            doctest::Approx(std::log(iterated_log(k, std::exp(x)))).epsilon(1e-13));
}

TEST_CASE("construction rules") {
  CHECK_THROWS_AS(NFunction::power_law(1), DomainError);
  CHECK_THROWS_AS(NFunction::exp_minus(0), DomainError);
  CHECK_THROWS_AS(NFunction::log_product({0.5, 2}), DomainError);
  CHECK_THROWS_AS(NFunction::log_product({1, 0, -1}), DomainError);
  CHECK_THROWS_AS(NFunction::log_product({1}), DomainError);
  CHECK(NFunction::log_product({1, 2, -1}).asymptotic_only());
  CHECK(NFunction::log_product({1, 0.5}).asymptotic_only());
  CHECK_FALSE(NFunction::log_product({1, 0, 2}).asymptotic_only());
  auto s = NFunction::slow_growth(2, 5, 2);
  CHECK(s.params() == std::vector<double>{1, 2, 5});
}

TEST_CASE("validate_nfunction") {
  auto grid = default_validation_grid();
  CHECK(validate_nfunction(NFunction::power_law(2), grid).pass);
  CHECK(validate_nfunction(NFunction::log_product({1, 2}), grid).pass);
  for (auto& f : builtins()) CHECK_MESSAGE(validate_nfunction(f, grid).pass, f.describe());
  auto lin = log_grid(1e-7, 1e7, 60);
  auto id = NFunction::tabulated(lin, lin);
  auto r = validate_nfunction(id, grid);
  CHECK_FALSE(r.superlinear_at_infinity);
  CHECK_FALSE(r.pass);
  CHECK(validate_nfunction(NFunction::power_law(2), {1.0, 2.0}).inconclusive);
}

TEST_CASE("tabulated interpolation reproduces a smooth family") {
  auto ts = log_grid(1e-7, 1e7, 400);
  std::vector<double> ps;
  auto ref = NFunction::log_product({1, 2});
  for (double t : ts) ps.push_back(ref.eval(t));
  auto tab = NFunction::tabulated(ts, ps);
  for (double t : log_grid(1e-6, 1e6, 37)) CHECK(tab.eval(t) == doctest::Approx(ref.eval(t)).epsilon(1e-5));
  CHECK_THROWS_AS(tab.eval(1e8), RangeError);
  CHECK_THROWS_AS(tab.eval_inverse(1e-40), RangeError);
  CHECK(tab.eval_inverse(ref.eval(3.0)) == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(validate_nfunction(tab, default_validation_grid()).pass);
}

TEST_CASE("monotonicity, ratio monotonicity, c Phi(t/c) <= Phi(t)") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-6, 6), c(0, 3);
  for (auto& f : builtins())
    for (int i = 0; i < 200; ++i) {
      double t1 = std::pow(10.0, u(rng)), t2 = std::pow(10.0, u(rng));
      if (t1 > t2) std::swap(t1, t2);
      double l1 = f.log_eval(std::log(t1)), l2 = f.log_eval(std::log(t2));
      CHECK(l1 <= l2);
      CHECK(l1 - std::log(t1) <= l2 - std::log(t2) + 1e-12);
      double cc = std::pow(10.0, c(rng));
      CHECK(std::log(cc) + f.log_eval(std::log(t2 / cc)) <= l2 + 1e-12 * (1 + std::fabs(l2)));
    }
}

TEST_CASE("log channel matches linear channel") {
  for (auto& f : builtins())
    for (double t : log_grid(1e-5, 1e2, 40)) {
      double lin = f.eval(t);
      CHECK(std::log(lin) == doctest::Approx(f.log_eval(std::log(t))).epsilon(1e-12));
      // derivative against a central difference
      double hh = 1e-6 * t;
      double fd = (f.eval(t + hh) - f.eval(t - hh)) / (2 * hh);
      CHECK(f.derivative(t) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("inverse round trip") {
  for (auto& f : builtins())
    for (double t : log_grid(1e-4, 1e4, 41)) {
      double y = f.eval(t);
      if (!std::isfinite(y)) continue;
      CHECK_MESSAGE(std::fabs(f.eval_inverse(y) / t - 1) < 1e-10, f.describe() << " t=" << t);
    }
}

TEST_CASE("large arguments stay finite in the log channel") {
  CHECK(std::isfinite(NFunction::exp_minus(1).log_eval(std::log(1e6))));
  CHECK(NFunction::exp_minus(1).log_eval(std::log(1e6)) == doctest::Approx(1e6).epsilon(1e-12));
  auto lp = NFunction::log_product({1, 2});
  CHECK(lp.log_ratio_ll(800) == doctest::Approx(2 * 800.0).epsilon(1e-12));
  CHECK(lp.log_ratio_ll(5) == doctest::Approx(lp.log_eval(std::exp(5.0)) - std::exp(5.0)).epsilon(1e-12));
  CHECK(std::isinf(NFunction::power_law(2).log_ratio_ll(800)));
}

TEST_CASE("descriptors") {
  auto f = NFunction::parse("logproduct:1,2,5");
  CHECK(f.describe() == "LogProduct(1,2,5)");
  auto g = NFunction::from_json(f.to_json());
  CHECK(g.params() == f.params());
  CHECK(NFunction::parse("power:2").family() == Family::PowerLaw);
  CHECK_THROWS_AS(NFunction::parse("power:x"), ConfigError);
  CHECK_THROWS_AS(NFunction::parse("cubic:2"), ConfigError);
  CHECK_THROWS_AS(NFunction::parse("power:0.5"), ConfigError);
}
