#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "orlicz/conjugate.hpp"
#include "orlicz/errors.hpp"

using namespace orlicz;

namespace {
const double e = std::exp(1.0);

// brute-force sup_t (s t - Phi(t)) on a fine log grid plus golden refinement
double grid_conjugate(const NFunction& phi, double s) {
  double best = 0, bt = 0;
  for (double lt = -20; lt <= 20; lt += 1e-3) {
    double t = std::exp(lt);
    double v = s * t - phi.eval(t);
    if (v > best) best = v, bt = lt;
  }
  double a = bt - 1e-3, b = bt + 1e-3;
  const double r = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 100; ++i) {
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = s * std::exp(c) - phi.eval(std::exp(c));
    double fd = s * std::exp(d) - phi.eval(std::exp(d));
    if (fc > fd) b = d; else a = c;
  }
  double t = std::exp(0.5 * (a + b));
  return std::max(best, s * t - phi.eval(t));
}

std::vector<NFunction> convex_builtins() {
  return {NFunction::power_law(1.5), NFunction::power_law(2),    NFunction::power_law(3),
          NFunction::exp_minus(0.5), NFunction::exp_minus(1),    NFunction::exp_minus(2),
          NFunction::log_product({1, 2}), NFunction::log_product({1, 3, 2}),
          NFunction::log_product({2, 1}), NFunction::log_product({1, 2, 5})};
}
}  // namespace

TEST_CASE("conjugate_at examples") {
  CHECK(conjugate_at(NFunction::power_law(2), 3) == doctest::Approx(4.5).epsilon(1e-15));
  for (auto& f : convex_builtins()) CHECK(conjugate_at(f, 0) == 0.0);
  CHECK(conjugate_at(NFunction::exp_minus(1), e - 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(grid_conjugate(NFunction::exp_minus(1), e - 1) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("numeric conjugate matches closed forms and a grid oracle") {
  for (auto& f : convex_builtins()) {
    ConjugatePair c(f);
    for (double s : log_grid(1e-3, 1e3, 31)) {
      double num = c.conjugate_numeric(s);
      CHECK_MESSAGE(num == doctest::Approx(c.conjugate(s)).epsilon(1e-8), f.describe() << " s=" << s);
      if (s < 50) CHECK_MESSAGE(num == doctest::Approx(grid_conjugate(f, s)).epsilon(1e-7), f.describe() << " s=" << s);
      // log channel
      CHECK(std::log(num) == doctest::Approx(c.log_conjugate(std::log(s))).epsilon(1e-10));
      // Fenchel equality at the maximizer
      double t = c.maximizer(s);
      CHECK(s * t == doctest::Approx(f.eval(t) + num).epsilon(1e-9));
    }
  }
}

TEST_CASE("conjugate inverse and h") {
  ConjugatePair p2(NFunction::power_law(2));
  CHECK(p2.h(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  for (double p : {1.5, 2.0, 3.0}) {
    ConjugatePair c(NFunction::power_law(p));
    double q = p / (p - 1);
    for (double t = -5; t <= 50; t += 2.5)
      CHECK(c.h(t) / (std::pow(q, 1 / q) * std::exp(t / q)) == doctest::Approx(1).epsilon(1e-13));
  }
  // ExpMinus: h(t) / (e^t / t) -> 1 for large t (ratio tends to 1 slowly)
  ConjugatePair ex(NFunction::exp_minus(1));
  double prev = 10;
  for (double t : {50.0, 200.0, 600.0}) {
    double r = std::exp(ex.log_h(t) - t + std::log(t));
    CHECK(std::fabs(r - 1) < prev);
    prev = std::fabs(r - 1);
  }
  CHECK(prev < 0.02);
  // h never crashes for |t| <= 700
  for (auto& f : convex_builtins()) {
    ConjugatePair c(f);
    for (double t : {-700.0, -10.0, 0.0, 10.0, 700.0}) CHECK(std::isfinite(c.log_h(t)));
    // inverse round trip in the log channel
    for (double ly : {-5.0, 0.0, 3.0, 40.0}) {
      double ls = c.log_conjugate_inverse(ly);
      CHECK(c.log_conjugate(ls) == doctest::Approx(ly).epsilon(1e-9));
    }
  }
}

TEST_CASE("h monotone and trivial lower bound h(t) >= e^t / Phi^{-1}(e^t)") {
  for (auto& f : convex_builtins()) {
    ConjugatePair c(f);
    double prev = -INFINITY;
    for (double t = -10; t <= 60; t += 0.5) {
      double lh = c.log_h(t);
      CHECK(lh > prev);
      prev = lh;
      CHECK(lh >= t - f.log_eval_inverse(t) - 1e-12);
    }
  }
}

TEST_CASE("hstar") {
  // synthetic h(t) = t: h*(s) = 0 for s <= 1
  auto ident = [](double t) { return t; };
  CHECK(legendre_sup(ident, 0.5, 0, 100) == doctest::Approx(0).epsilon(1e-12));
  CHECK(legendre_sup(ident, 1.0, 0, 100) == doctest::Approx(0).epsilon(1e-12));

  ConjugatePair c(NFunction::power_law(2));
  double hp1 = std::exp(c.log_h_prime(1));
  CHECK(c.hstar(hp1) == doctest::Approx(hp1 - c.h(1)).epsilon(1e-12));
  auto h = [&](double t) { return c.h(t); };
  for (auto& f : convex_builtins()) {
    ConjugatePair cc(f);
    auto hh = [&](double t) { return cc.h(t); };
    double t0 = cc.tau0();
    for (double s : {t0, 2 * t0, 10 * t0}) {
      double oracle = legendre_sup(hh, s, 0, 40, 1601);
      CHECK_MESSAGE(cc.hstar(s) == doctest::Approx(oracle).epsilon(1e-9), f.describe() << " s=" << s);
      double y = cc.hstar(s);
      if (y > cc.hstar_at_tau0() * (1 + 1e-9) && s > t0)
        CHECK(cc.hstar_inverse(y) == doctest::Approx(s).epsilon(1e-8));
    }
    // below the strict-increase region
    CHECK_THROWS_AS(cc.hstar_inverse(cc.hstar_at_tau0() * 0.5), DomainError);
    try {
      cc.hstar_inverse(cc.hstar_at_tau0() * 0.5);
    } catch (const DomainError& err) {
      CHECK(std::string(err.what()).find("tau0") != std::string::npos);
    }
  }
  (void)h;
}

TEST_CASE("Young and product inequalities") {
  CHECK(check_young(ConjugatePair(NFunction::power_law(2)), 0, 0).margin == 0);
  for (double t : {0.3, 1.0, 7.0})
    CHECK(check_young(ConjugatePair(NFunction::power_law(2)), t, t).margin ==
          doctest::Approx(0).epsilon(1e-12).scale(t * t));
  CHECK(check_young(ConjugatePair(NFunction::exp_minus(1)), 2, 3).margin > 0);
  auto r = check_universal_product(ConjugatePair(NFunction::power_law(2)), 1);
  CHECK(r.ratio == doctest::Approx(2).epsilon(1e-14));
  CHECK(r.ok);
  CHECK(check_universal_product(ConjugatePair(NFunction::exp_minus(1)), 10).ok);
  auto r3 = check_universal_product(ConjugatePair(NFunction::power_law(3)), 1);
  CHECK(r3.ratio == doctest::Approx(std::cbrt(3.0) * std::pow(1.5, 2.0 / 3)).epsilon(1e-13));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  for (auto& f : convex_builtins()) {
    ConjugatePair c(f);
    for (int i = 0; i < 300; ++i) {
      double s = std::pow(10.0, u(rng)), t = std::pow(10.0, u(rng));
      CHECK(check_young(c, s, t).ok);
      CHECK(check_universal_product(c, t).ok);
    }
  }
}

TEST_CASE("biconjugation") {
  for (auto& f : convex_builtins()) {
    ConjugatePair c(f);
    Biconjugate bc(c);
    // 41 points put several t where Phi(t) < 1e-10
    for (double t : log_grid(1e-2, 1e2, 41))
      CHECK_MESSAGE(bc(t) == doctest::Approx(f.eval(t)).epsilon(1e-6), f.describe() << " t=" << t);
  }
}

TEST_CASE("conjugate order") {
  CHECK(check_conjugate_order(NFunction::power_law(2), NFunction::power_law(2), log_grid(1e-2, 1e2, 21)).pass());
  CHECK(check_conjugate_order(NFunction::log_product({1, 2}), NFunction::power_law(2), log_grid(1e2, 1e6, 21)).pass());
  auto bad = check_conjugate_order(NFunction::power_law(3), NFunction::power_law(2), log_grid(1e1, 1e3, 5));
  CHECK_FALSE(bad.precondition);
}

TEST_CASE("slowly growing Phi lies below its conjugate for large t") {
  for (auto v : {std::vector<double>{1, 2}, std::vector<double>{1, 3, 2}}) {
    ConjugatePair c(NFunction::log_product(v));
    for (double t : {1e5, 1e6}) CHECK(c.phi().log_eval(std::log(t)) < c.log_conjugate(std::log(t)));
  }
}
