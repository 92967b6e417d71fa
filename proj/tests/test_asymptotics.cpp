#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "orlicz/asymptotics.hpp"
#include "orlicz/conjugate.hpp"
#include "orlicz/errors.hpp"

using namespace orlicz;

TEST_CASE("prec on simple pairs") {
  LogFn t = [](double x) { return std::log(x); };
  auto same = prec_check(t, t, 1, 1e6);
  CHECK(same.direction == Direction::Prec);
  CHECK(same.C1 == doctest::Approx(1));
  CHECK(same.C2 == 1);

  // e^{2t} <= e^{(2t)}: argument rescaling by 2
  LogFn e2 = [](double x) { return 2 * x; }, e1 = [](double x) { return x; };
  auto r = prec_check(e2, e1, 1, 100);
  CHECK(r.direction == Direction::Prec);
  CHECK(r.C2 == 2);
  CHECK(r.C1 == doctest::Approx(1));

  LogFn tlog = [](double x) { return std::log(x) + std::log(std::log1p(x)); };
  CHECK(prec_check(tlog, t, 1, 1e4).direction == Direction::NotPrec);
  CHECK(prec_check(t, tlog, 1, 1e4).direction == Direction::Prec);
  CHECK(sim_check(tlog, t, 1, 1e4).direction == Direction::NotPrec);
  CHECK_THROWS_AS(prec_check(t, t, 2, 1), ConfigError);
}

TEST_CASE("sim on equal and rescaled functions") {
  LogFn sq = [](double x) { return 2 * std::log(x); };
  LogFn sq3 = [](double x) { return std::log(3.0) + 2 * std::log(x); };
  auto v = sim_check(sq, sq3, 1, 1e6);
  CHECK(v.direction == Direction::Sim);
  CHECK(v.to_json()["direction"] == "sim");
  CHECK(sim_check(sq, sq, 1, 10).direction == Direction::Sim);
}

TEST_CASE("prec is transitive through composed witnesses") {
  LogFn f = [](double x) { return std::log(x) + 1; };
  LogFn g = [](double x) { return std::log(x); };
  LogFn h = [](double x) { return std::log(x) - 2; };
  auto fg = prec_check(f, g, 1, 1e6), gh = prec_check(g, h, 1, 1e6);
  REQUIRE(fg.direction == Direction::Prec);
  REQUIRE(gh.direction == Direction::Prec);
  // f(t) <= C1 g(C2 t) <= C1 C1' h(C2' C2 t)
  double C1 = fg.C1 * gh.C1, C2 = fg.C2 * gh.C2;
  for (double t = 1; t <= 1e6; t *= 3) CHECK(f(t) <= std::log(C1) + h(C2 * t) + 1e-12);
  CHECK(prec_check(f, h, 1, 1e6).direction == Direction::Prec);
}

TEST_CASE("numeric channels agree with closed forms") {
  auto p2 = NFunction::power_law(2);
  CHECK(numeric_log_conjugate(p2, std::log(3.0)) == doctest::Approx(std::log(4.5)).epsilon(1e-12));
  CHECK(numeric_log_h(p2, 1.0) == doctest::Approx(0.5 * std::log(2.0) + 0.5).epsilon(1e-12));
  auto e1 = NFunction::exp_minus(1);
  double s = 5, u = s;
  CHECK(numeric_log_conjugate(e1, std::log(s)) ==
        doctest::Approx(std::log((1 + u) * std::log1p(u) - u)).epsilon(1e-10));
}

TEST_CASE("biconjugate is equivalent to the function") {
  for (auto phi : {NFunction::power_law(1.5), NFunction::power_law(3), NFunction::exp_minus(1),
                   NFunction::log_product({1, 2})}) {
    ConjugatePair pair(phi);
    Biconjugate bi(pair);
    LogFn f = [&bi](double t) { return std::log(bi(t)); };
    LogFn g = [&phi](double t) { return phi.log_eval(std::log(t)); };
    auto v = sim_check(f, g, 1, 1e2);
    CHECK_MESSAGE(v.direction == Direction::Sim, phi.describe());
  }
}

TEST_CASE("example suite") {
  auto r = verify_example_suite();
  CHECK(r.all_pass);
  CHECK(r.seconds < 30);
  CHECK(r.items.size() >= 15);
  for (const auto& it : r.items) {
    CHECK_MESSAGE(it.pass, it.name);
    if (it.name.rfind("power-conjugate", 0) == 0) CHECK(it.max_abs_log_ratio <= 0.1);
  }
  auto j = r.to_json();
  CHECK(j["items"].size() == r.items.size());
  CHECK(r.items[0].curve_csv().rfind("t,log_f,log_g\n", 0) == 0);
}
