#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "orlicz/errors.hpp"
#include "orlicz/geometry.hpp"

using namespace orlicz;

namespace {

// log(1 + t) iterated i times
double g(int i, double t) {
  double v = t;
  for (int j = 0; j < i; ++j) v = std::log1p(v);
  return v;
}

}  // namespace

TEST_CASE("witness shape and inputs") {
  auto f1 = witness_phi1(2, 3, 4);
  CHECK(f1.family() == Family::LogProduct);
  CHECK(f1.params() == std::vector<double>{1, 2, 2, 2, 4});
  CHECK_THROWS_AS(witness_phi1(2, 1, 2), ConfigError);
  auto in = make_geometry_inputs(NFunction::log_product({1, 2, 5}), 2);
  CHECK(in.ell == 4);
  CHECK(in.q == 4);
  CHECK(log_depth(NFunction::power_law(2)) == 0);
  CHECK(log_depth(NFunction::log_product({1, 2, 5})) == 2);
  auto led = GeometryLedger::from_json(nlohmann::json{{"C", 3.0}});
  CHECK(led.C == 3.0);
  CHECK(led.A == 1.0);
}

TEST_CASE("iterated logs beyond the double range") {
  for (double xi : {1.0, 5.0, 50.0}) {
    double t = std::exp(std::exp(xi));
    if (!std::isfinite(t)) continue;
    for (int i = 1; i <= 3; ++i) CHECK(log_g_ll(i, xi) == doctest::Approx(std::log(g(i, t))).epsilon(1e-12));
  }
  // log(1 + e^{e^xi}) = e^xi up to e^{-e^xi}
  CHECK(log_g_ll(1, 800) == doctest::Approx(800));
  CHECK(log_g_ll(2, 800) == doctest::Approx(std::log(800.0)));
}

TEST_CASE("phi2 parametrisation") {
  auto phi = NFunction::power_law(2), phi1 = witness_phi1(2, 2, 4);
  for (double t : {1.0, 3.0, 50.0, 1e4}) {
    double s = phi1.eval(t) / t;
    CHECK(phi2_of(phi, phi1, s) == doctest::Approx(phi.eval(t) / t).epsilon(1e-9));
  }
  CHECK_THROWS_AS(phi2_of(phi, phi1, 0.5 * phi1.eval(1.0)), DomainError);
}

TEST_CASE("E1 against direct evaluation") {
  auto phi1 = NFunction::log_product({1, 3});
  EFunction E(NFunction::power_law(2), phi1, 2);
  // g_1(e - 1) = 1, so Phi1(e - 1) = e - 1
  CHECK(E.E1(std::exp(1.0) - 1) == doctest::Approx(std::exp(1.0) - 1).epsilon(1e-12));
  EFunction E3(NFunction::power_law(2), witness_phi1(3, 2, 5), 3);
  for (double t : {2.0, 40.0, 1e6}) {
    double direct = std::sqrt(t * t / E3.phi1().eval(t));
    CHECK(E3.E1(t) == doctest::Approx(direct).epsilon(1e-10));
  }
  CHECK(E.E(0.5) == E.E(1.0));
}

TEST_CASE("equal functions give E2 = 1") {
  auto f = witness_phi1(2, 2, 4);
  EFunction E(f, f, 2);
  for (double t : {2.0, 100.0, 1e6}) CHECK(E.E2(t) == doctest::Approx(1).epsilon(1e-9));
}

TEST_CASE("comparisons hold on the pipeline pairs") {
  auto grid = log_grid(1, 1e8, 25);
  EFunction A(NFunction::power_law(2), NFunction::log_product({1, 2, 2, 3}), 2);
  CHECK(check_comparisons(A, grid).pass);
  EFunction B(NFunction::log_product({1, 2, 5}), NFunction::log_product({1, 2, 2, 2, 3}), 2);
  auto r = check_comparisons(B, grid);
  CHECK(r.pass);
  CHECK(r.to_json().contains("worst_log_dual"));
  CHECK(check_lemma_E_bound(A).finite);
}

TEST_CASE("E is nondecreasing and at most E1") {
  EFunction E(NFunction::log_product({1, 2, 5}), NFunction::log_product({1, 2, 2, 2, 3}), 2);
  double prev = -1e300;
  for (double x = 0; x <= 60; x += 1.5) {
    double lE = E.log_E(x);
    CHECK(lE <= E.log_E1(x) + 1e-12);
    CHECK(lE >= prev - 1e-9);
    prev = lE;
  }
}

TEST_CASE("growth constant") {
  auto pw = check_growth_L(NFunction::power_law(2));
  CHECK(pw.verdict == CheckVerdict::Fails);
  auto lp = check_growth_L(NFunction::log_product({1, 2, 2, 3}));
  CHECK(lp.verdict == CheckVerdict::Holds);
  REQUIRE(lp.bound);
  CHECK(lp.L <= *lp.bound);
  // t1 = t2 = 1 gives Phi(1) / (2 Phi(1))
  auto one = check_growth_L(NFunction::log_product({1, 2}), {1.0});
  CHECK(one.L == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("green integrability oracles") {
  // E = t: int_1^inf dt / t^2 = 1
  auto r = green_integrability([](double u) { return u; });
  CHECK(r.converges());
  CHECK(r.value == doctest::Approx(1).epsilon(1e-6));
  // E = sqrt(t): int_1^inf t^{-3/2} dt = 2
  auto r2 = green_integrability([](double u) { return 0.5 * u; });
  CHECK(r2.value == doctest::Approx(2).epsilon(1e-6));
  // E = 1 diverges
  CHECK(green_integrability([](double) { return 0.0; }).verdict == Verdict::Diverges);
  EFunction E(NFunction::power_law(2), NFunction::log_product({1, 2, 2, 3}), 2);
  CHECK(green_integrability(E, recognize_subcase(E.phi(), 2, 2, 3)->green_model).converges());
}

TEST_CASE("closed form exponents") {
  auto poly = closed_form_exponents("poly", 2, {2}, 0, 3);
  CHECK(poly.E[0] == doctest::Approx(1));
  CHECK(poly.E[1] == doctest::Approx(-3));
  CHECK(poly.green_converges);
  CHECK(poly.composition == std::vector<double>{2, 2 * 2.5 + 3});

  // slow-k1: t-exponent (p - n)/(pn - p + n)
  auto k1 = closed_form_exponents("slow-k1", 2, {5}, 2, 4);
  CHECK(k1.E[0] == doctest::Approx(3.0 / 7));
  CHECK(k1.E[1] == doctest::Approx(-10.0 / 7));
  CHECK(k1.E[2] == doctest::Approx(-20.0 / 7));

  auto s21 = closed_form_exponents("slow-2.1", 2, {1, 2, 5}, 4, 3);
  CHECK(s21.E[0] == 0);
  CHECK(s21.E[1] == doctest::Approx(1.5));
  CHECK(s21.green_converges);
  CHECK(s21.exp_t_exponent == doctest::Approx(2.0));
  auto s21d = closed_form_exponents("slow-2.1", 2, {1, 2, 3}, 4, 3);
  CHECK_FALSE(s21d.green_converges);

  // first nonzero exponent past 1 decides
  auto s23 = closed_form_exponents("slow-2.3", 2, {1, 2, 5, 2}, 4, 3);
  CHECK(s23.E[1] == doctest::Approx(1.5));
  CHECK(s23.E[2] == 0);
  CHECK(s23.green_converges);
  // g_1 exponent 0: 1/(t E) is not integrable
  auto s22 = closed_form_exponents("slow-2.2", 2, {1, 2, 2, 3}, 4, 3);
  CHECK(s22.E[1] == 0);
  CHECK(s22.E[2] == doctest::Approx(0.5));
  CHECK_FALSE(s22.green_converges);
  CHECK_THROWS_AS(closed_form_exponents("slow-2.2", 2, {1, 2, 3, 3}, 4, 3), ConfigError);
  CHECK_THROWS_AS(closed_form_exponents("bogus", 2, {2}, 0, 3), ConfigError);

  auto rec = recognize_subcase(NFunction::log_product({1, 2, 2, 5}), 2, 5, 4);
  REQUIRE(rec);
  CHECK(rec->subcase == "slow-2.2");
  CHECK_FALSE(recognize_subcase(NFunction::log_product({1, 1.5}), 2, 3, 4));
}

TEST_CASE("closed form evaluation matches the g chain") {
  auto r = closed_form_exponents("poly", 2, {2}, 1, 3);
  double t = 1e5, x = std::log(t);
  double direct = std::log(t) - 2 * std::log(g(1, t)) - 3 * std::log(g(2, t));
  CHECK(r.log_E_closed(x) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(r.log_E_closed_ll(std::log(x)) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("symbolic feasibility") {
  auto v = [](std::vector<double> p, int n) {
    return diameter_feasible_symbolic(NFunction::log_product(std::move(p)), n).verdict;
  };
  CHECK(v({2}, 2) == Feasibility::Feasible);
  CHECK(v({1, 3}, 2) == Feasibility::Feasible);
  CHECK(v({1, 1.5}, 2) == Feasibility::Infeasible);
  CHECK(v({1, 2, 5}, 2) == Feasibility::Feasible);
  CHECK(v({1, 2, 4}, 2) == Feasibility::Infeasible);
  CHECK(v({1, 2, 3}, 2) == Feasibility::Infeasible);
  CHECK(v({1, 2, 4, 5}, 2) == Feasibility::Feasible);
  CHECK(v({1, 3, 7}, 3) == Feasibility::Feasible);
  CHECK(v({1, 3, 6}, 3) == Feasibility::Infeasible);
  CHECK_THROWS_AS(diameter_feasible_symbolic(NFunction::power_law(2), 2), UnsupportedError);
}

TEST_CASE("witness search agrees with the symbolic verdict") {
  for (auto p : std::vector<std::vector<double>>{{1, 2, 5}, {1, 3}, {1, 2, 3}}) {
    auto f = NFunction::log_product(p);
    auto s = diameter_feasible_symbolic(f, 2);
    auto w = witness_search(f, 2);
    if (w.verdict != Feasibility::Unknown) CHECK(w.verdict == s.verdict);
    if (s.verdict == Feasibility::Infeasible) CHECK(w.verdict != Feasibility::Feasible);
  }
  CHECK(diameter_feasible(NFunction::power_law(2), 2).verdict == Feasibility::Feasible);
  CHECK(diameter_feasible(NFunction::exp_minus(1), 2).verdict == Feasibility::Feasible);
}

TEST_CASE("pipeline for a power law") {
  auto in = make_geometry_inputs(NFunction::power_law(2), 2, 2, 3.0);
  auto b = psi_pipeline(in);
  CHECK(b.green().converges());
  CHECK(b.green_tilde().converges());
  CHECK(b.tilde_scale() <= 1);
  // E_tilde <= E and E_tilde / E -> 0
  for (double x = 0; x <= 60; x += 2) CHECK(b.log_E_tilde(x) - b.E().log_E(x) <= 1e-9);
  double d20 = b.log_E_tilde(20) - b.E().log_E(20), d60 = b.log_E_tilde(60) - b.E().log_E(60);
  CHECK(d60 < d20);
  CHECK(d60 < -30);
  for (double t : {3.0, 1e3, 1e6}) {
    double u = std::exp(b.log_E_tilde(std::log(t)));
    CHECK(b.tilde_psi(u) == doctest::Approx(b.E().E(t)).epsilon(1e-8));
  }
  double prev_v = 1;
  for (double r : {1e-1, 1e-2, 1e-4, 1e-6}) {
    double v = b.volume(r);
    CHECK(v <= prev_v);
    CHECK(v > 0);
    prev_v = v;
  }
  CHECK(b.volume(1e-6) < 1e-15);
  CHECK(volume_lower_bound(b, 1e-3) == b.volume(1e-3));

  // a copy must stay usable after the original is gone
  GeometryBound* heap = new GeometryBound(b);
  GeometryBound copy = *heap;
  delete heap;
  CHECK(copy.log_volume(1e-3) == doctest::Approx(b.log_volume(1e-3)));

  std::istringstream csv(b.volume_csv({1e-2, 1e-3}));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "r,v,log_v,v_closed");
  auto j = b.to_json();
  CHECK(j.contains("green"));
}

TEST_CASE("pipeline rejects bad q' and divergent E") {
  auto in = make_geometry_inputs(NFunction::power_law(2), 2, 2, 3.0, 1.0);
  CHECK_THROWS_AS(psi_pipeline(in), ConfigError);
  auto bad = make_geometry_inputs(NFunction::log_product({1, 2, 4}), 2);
  CHECK_THROWS_AS(psi_pipeline(bad), PreconditionError);
}
