#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "orlicz/asymptotics.hpp"
#include "orlicz/conjugate.hpp"
#include "orlicz/csv_io.hpp"
#include "orlicz/errors.hpp"
#include "orlicz/geometry.hpp"
#include "orlicz/nfunctions.hpp"
#include "orlicz/orlicz_measure.hpp"
#include "orlicz/quadrature.hpp"
#include "orlicz/stability.hpp"

using namespace orlicz;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfig = 2, kNumeric = 3, kPrecondition = 4 };

const std::vector<std::string> kCommands{"conjugate", "hbar",      "diameter",     "volume",
                                         "luxemburg", "verify", "integrability"};

struct PhiOptions {
  std::string phi, family, p, a;
  int k = 1;
};

struct Global {
  std::string out, format = "both", ledger;
  std::optional<double> seed_constants;
  json config = json::object();
};

struct Grid {
  double lo, hi;
  std::size_t count;
  std::vector<double> values() const {
    if (count == 0) throw ConfigError("grid needs at least one point");
    if (!(lo > 0) || !(hi >= lo)) throw ConfigError("grid range must be positive and ordered");
    if (count == 1) return {lo};
    return log_grid(lo, hi, count);
  }
};

void add_phi_options(CLI::App* c, PhiOptions& o) {
  c->add_option("--phi", o.phi, "N-function descriptor, e.g. power:2 or logproduct:1,2,5");
  c->add_option("--family", o.family, "power|expminus|logproduct|slowgrowth")
      ->check(CLI::IsMember({"power", "expminus", "logproduct", "slowgrowth"}));
  c->add_option("--p", o.p, "exponent; comma list for logproduct");
  c->add_option("--a", o.a, "expminus parameter");
  c->add_option("--k", o.k, "slowgrowth depth");
}

std::string phi_descriptor(const PhiOptions& o, int n) {
  if (!o.phi.empty()) {
    if (!o.family.empty()) throw ConfigError("give either --phi or --family, not both");
    return o.phi;
  }
  if (o.family.empty()) throw ConfigError("an N-function is required (--phi or --family)");
  auto need = [](const std::string& v, const char* flag) {
    if (v.empty()) throw ConfigError(std::string("--family needs ") + flag);
    return v;
  };
  if (o.family == "power") return "power:" + need(o.p, "--p");
  if (o.family == "expminus") return "expminus:" + need(o.a, "--a");
  if (o.family == "logproduct") return "logproduct:" + need(o.p, "--p");
  return "slowgrowth:" + std::to_string(o.k) + "," + need(o.p, "--p") + "," + std::to_string(n);
}

void check_n(int n) {
  if (n < 1) throw ConfigError("--n must be >= 1");
}

// ledger values: --seed-constants first, then --ledger overrides
void apply_ledger(const Global& g, ConstantLedger& c, GeometryLedger& geo) {
  if (g.seed_constants) {
    double v = *g.seed_constants;
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError("--seed-constants must be positive");
    c.K = c.C1 = c.C2 = c.C3 = c.C4 = c.C5 = c.A = v;
    geo.A = geo.K = geo.L = geo.C = v;
  }
  if (g.ledger.empty()) return;
  json j;
  try {
    j = json::parse(g.ledger);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("--ledger is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("--ledger must be a JSON object");
  for (auto& [key, val] : j.items()) {
    if (!val.is_number()) throw ConfigError("ledger value '" + key + "' is not a number");
    double v = val.get<double>();
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError("ledger value '" + key + "' must be positive");
    bool used = false;
    auto set = [&](const char* name, double& slot) {
      if (key == name) {
        slot = v;
        used = true;
      }
    };
    set("K", c.K), set("C1", c.C1), set("C2", c.C2), set("C3", c.C3), set("C4", c.C4);
    set("C5", c.C5), set("A", c.A);
    set("A", geo.A), set("K", geo.K), set("L", geo.L), set("C", geo.C);
    if (!used) throw ConfigError("unknown ledger constant '" + key + "'");
  }
}

class Output {
 public:
  explicit Output(const Global& g) : dir_(g.out), format_(g.format) {
    if (dir_.empty()) {
      if (const char* env = std::getenv("ORLICZ_OUT_DIR")) dir_ = env;
    }
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }
  void csv(const std::string& name, const std::string& content) const {
    if (!dir_.empty() && format_ != "json") write_text_atomic(path(name + ".csv"), content);
  }
  void json_file(const std::string& name, const json& j) const {
    if (!dir_.empty() && format_ != "csv") write_text_atomic(path(name + ".json"), j.dump(2) + "\n");
  }

 private:
  std::string dir_, format_;
  std::string path(const std::string& f) const { return (std::filesystem::path(dir_) / f).string(); }
};

json run_config(const std::string& command, const Global& g) {
  json j = g.config;
  j["command"] = command;
  j["format"] = g.format;
  return j;
}

// least squares of y on the columns of X plus an intercept
std::vector<double> least_squares(const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
  std::size_t m = X.size() + 1;
  std::vector<std::vector<double>> A(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i < y.size(); ++i) {
    std::vector<double> row{1.0};
    for (const auto& col : X) row.push_back(col[i]);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) A[r][c] += row[r] * row[c];
      A[r][m] += row[r] * y[i];
    }
  }
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    if (A[c][c] == 0) throw EvaluationError("singular fit", 0);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == c) continue;
      double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k <= m; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<double> beta(m);
  for (std::size_t c = 0; c < m; ++c) beta[c] = A[c][m] / A[c][c];
  return beta;
}

std::string csv_with_text(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                          const std::vector<std::string>& text) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (double v : rows[r]) os << format_number(v) << ",";
    os << text[r] << "\n";
  }
  return os.str();
}

int cmd_conjugate(const Global& g, const PhiOptions& po, int n, std::vector<double> s, const Grid& grid,
                  bool use_grid) {
  auto phi = NFunction::parse(phi_descriptor(po, n));
  ConjugatePair pair(phi);
  if (s.empty() || use_grid) {
    auto extra = grid.values();
    s.insert(s.end(), extra.begin(), extra.end());
  }
  for (double v : s)
    if (!(v >= 0) || !std::isfinite(v)) throw ConfigError("--s values must be finite and >= 0");
  bool closed = pair.conjugate_provenance() == Provenance::ClosedForm;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> prov;
  for (double v : s) {
    double value = pair.conjugate(v);
    std::cout << format_number(value) << "\n";
    rows.push_back({v, value, closed ? value : std::nan("")});
    prov.push_back(provenance_name(pair.conjugate_provenance()));
  }
  Output out(g);
  out.csv("conjugate", csv_with_text({"s", "phi_star", "closed_form", "provenance"}, rows, prov));
  json meta{{"config", run_config("conjugate", g)}, {"phi", phi.to_json()}, {"describe", phi.describe()},
            {"provenance", pair.provenance_json()}, {"count", s.size()}};
  out.json_file("conjugate", meta);
  return kOk;
}

int cmd_hbar(const Global& g, const PhiOptions& po, int n, const Grid& grid, bool use_grid) {
  check_n(n);
  auto phi = NFunction::parse(phi_descriptor(po, n));
  ConjugatePair pair(phi);
  Output out(g);
  auto second = second_condition(pair, n);
  if (!second.converges()) {
    json rep{{"config", run_config("hbar", g)},
             {"phi", phi.describe()},
             {"n", n},
             {"error", "second integrability condition does not converge"},
             {"second_condition", second.to_json()}};
    out.json_file("hbar", rep);
    std::cout << rep.dump(2) << "\n";
    return kPrecondition;
  }
  ConstantLedger ledger;
  GeometryLedger unused;
  apply_ledger(g, ledger, unused);
  auto deltas = use_grid ? grid.values() : default_delta_grid();
  auto prof = stability_profile(pair, n, deltas, ledger);

  // log hbar = c + alpha log delta + beta log(-log delta)
  std::vector<double> ld, lld, lh;
  for (std::size_t i = 0; i < prof.delta.size(); ++i) {
    if (!(prof.hbar[i] > 0) || !(prof.delta[i] < 1)) continue;
    ld.push_back(std::log(prof.delta[i]));
    lld.push_back(std::log(-std::log(prof.delta[i])));
    lh.push_back(std::log(prof.hbar[i]));
  }
  json fit = nullptr;
  if (lh.size() >= 4) {
    auto b = least_squares({ld, lld}, lh);
    auto raw = least_squares({ld}, lh);
    fit = {{"delta_exponent", b[1]}, {"log_exponent", b[2]}, {"raw_slope", raw[1]}};
  }
  bool monotone = true;
  for (std::size_t i = 1; i < prof.hbar.size(); ++i)
    monotone = monotone && prof.hbar[i] > prof.hbar[i - 1] && prof.tau[i] < prof.tau[i - 1];
  json meta = prof.to_json();
  meta["config"] = run_config("hbar", g);
  meta["second_condition"] = second.to_json();
  meta["fit"] = fit;
  meta["monotone"] = monotone;
  std::string csv = prof.to_csv();
  out.csv("hbar", csv);
  out.json_file("hbar", meta);
  std::cout << csv;
  std::cerr << "fit: " << fit.dump() << "\n";
  return kOk;
}

int cmd_diameter(const Global& g, const PhiOptions& po, int n, int budget) {
  check_n(n);
  auto phi = NFunction::parse(phi_descriptor(po, n));
  auto rep = diameter_feasible(phi, n, budget);
  json j = rep.to_json();
  j["config"] = run_config("diameter", g);
  Output(g).json_file("diameter", j);
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_volume(const Global& g, const PhiOptions& po, int n, const Grid& grid, std::optional<int> ell,
               std::optional<double> q, double q_prime) {
  check_n(n);
  auto phi = NFunction::parse(phi_descriptor(po, n));
  Output out(g);
  auto feas = diameter_feasible(phi, n);
  if (feas.verdict == Feasibility::Infeasible) {
    json rep{{"config", run_config("volume", g)},
             {"error", "no admissible witness: " + feas.reason},
             {"feasibility", feas.to_json()}};
    out.json_file("volume", rep);
    std::cout << rep.dump(2) << "\n";
    return kPrecondition;
  }
  auto in = make_geometry_inputs(phi, n, ell, q, q_prime);
  ConstantLedger unused;
  apply_ledger(g, unused, in.ledger);
  auto bound = psi_pipeline(in);
  auto rs = grid.values();
  std::string csv = bound.volume_csv(rs);

  // slope of log v against log r over the smallest decade of the grid
  std::vector<double> lr, lv;
  for (double r : rs) {
    if (r > rs.front() * 10) continue;
    lr.push_back(std::log(r));
    lv.push_back(bound.log_volume(r));
  }
  json j = bound.to_json();
  j["config"] = run_config("volume", g);
  j["feasibility"] = feas.to_json();
  j["small_r_slope"] = lr.size() >= 2 ? json(least_squares({lr}, lv)[1]) : json(nullptr);
  out.csv("volume", csv);
  out.json_file("volume", j);
  std::cout << csv;
  return kOk;
}

int cmd_luxemburg(const Global& g, const PhiOptions& po, int n, const std::string& density,
                  std::size_t tail_count) {
  auto phi = NFunction::parse(phi_descriptor(po, n));
  if (density.empty()) throw ConfigError("--density is required");
  auto F = load_density(density);
  double norm = luxemburg_norm(phi, F);
  std::cout << format_number(norm) << "\n";
  json j{{"config", run_config("luxemburg", g)},
         {"phi", phi.describe()},
         {"density", density},
         {"cells", F.size()},
         {"mass", F.mass()},
         {"norm", norm}};
  if (norm > 0) j["modular_at_norm"] = modular(phi, F, norm);
  Output out(g);
  if (tail_count > 0) {
    ConjugatePair pair(phi);
    auto curve = tail_bound_curve(pair, F, log_grid(1e-2, 1e6, tail_count));
    bool dominated = true;
    for (const auto& p : curve) dominated = dominated && p.actual <= p.bound;
    j["tail_dominated"] = dominated;
    out.csv("tail", tail_curve_csv(curve));
  }
  out.json_file("luxemburg", j);
  return kOk;
}

int cmd_verify(const Global& g) {
  auto rep = verify_example_suite();
  json j = rep.to_json();
  j.erase("seconds");  // keeps the report deterministic
  j["config"] = run_config("verify", g);
  Output out(g);
  for (const auto& it : rep.items) out.csv("verify_" + it.name, it.curve_csv());
  out.json_file("verify", j);
  std::cout << j.dump(2) << "\n";
  return rep.all_pass ? kOk : kCheckFailed;
}

int cmd_integrability(const Global& g, const PhiOptions& po, int n) {
  check_n(n);
  auto phi = NFunction::parse(phi_descriptor(po, n));
  ConjugatePair pair(phi);
  auto I = I_of(pair, n);
  auto second = second_condition(pair, n);
  json j{{"config", run_config("integrability", g)},
         {"phi", phi.describe()},
         {"n", n},
         {"I", I.to_json()},
         {"second_condition", second.to_json()},
         {"agree", I.verdict == second.verdict}};
  Output(g).json_file("integrability", j);
  std::cout << j.dump(2) << "\n";
  bool classified = I.verdict != Verdict::Inconclusive && second.verdict != Verdict::Inconclusive;
  return classified ? kOk : kNumeric;
}

// --config FILE: JSON keys become long options placed after the command name,
// so explicit flags given on the command line win (TakeLast).
std::vector<std::string> expand_config(std::vector<std::string> args, json& config) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  config = j;
  std::size_t pos = args.size();
  for (std::size_t i = 1; i < args.size(); ++i)
    if (std::find(kCommands.begin(), kCommands.end(), args[i]) != kCommands.end()) {
      pos = i;
      break;
    }
  if (pos == args.size()) {
    if (!j.contains("command")) throw ConfigError("config has no 'command' and none was given");
    args.push_back(j["command"].get<std::string>());
  }
  std::size_t at = pos + 1;
  std::vector<std::string> flags;
  for (auto& [key, val] : j.items()) {
    if (key == "command") continue;
    std::string flag = "--" + key;
    if (val.is_boolean()) {
      if (val.get<bool>()) flags.push_back(flag);
    } else if (val.is_array()) {
      for (auto& v : val) {
        flags.push_back(flag);
        flags.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      }
    } else {
      flags.push_back(flag);
      flags.push_back(val.is_string() ? val.get<std::string>() : val.dump());
    }
  }
  args.insert(args.begin() + at, flags.begin(), flags.end());
  return args;
}

int run(int argc, char** argv) {
  Global g;
  std::vector<std::string> args(argv, argv + argc);
  args = expand_config(args, g.config);

  CLI::App app{"Orlicz-type N-function toolkit"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", g.out, "output directory (default: $ORLICZ_OUT_DIR)");
  app.add_option("--format", g.format, "files to write")->check(CLI::IsMember({"csv", "json", "both"}));
  app.add_option("--seed-constants", g.seed_constants, "set every ledger constant");
  app.add_option("--ledger", g.ledger, "JSON object of ledger constants");

  PhiOptions po;
  int n = 2, budget = 2;
  std::vector<double> s;
  Grid sgrid{1e-3, 1e3, 25}, dgrid{1e-12, 1e-3, 25}, rgrid{1e-6, 1e-1, 26};
  bool s_grid = false, d_grid = false;
  std::string density;
  std::size_t tail = 0;
  std::optional<int> ell;
  std::optional<double> q;
  double q_prime = 2.5;

  auto* conj = app.add_subcommand("conjugate", "Phi*(s) with closed form and provenance");
  add_phi_options(conj, po);
  conj->add_option("--n", n, "dimension (slowgrowth only)");
  conj->add_option("--s", s, "evaluation point, repeatable")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  conj->add_option("--s-min", sgrid.lo)->each([&](const std::string&) { s_grid = true; });
  conj->add_option("--s-max", sgrid.hi)->each([&](const std::string&) { s_grid = true; });
  conj->add_option("--count", sgrid.count)->each([&](const std::string&) { s_grid = true; });

  auto* hb = app.add_subcommand("hbar", "tau(delta) and hbar(delta) profile");
  add_phi_options(hb, po);
  hb->add_option("--n", n, "dimension");
  hb->add_option("--delta-min", dgrid.lo)->each([&](const std::string&) { d_grid = true; });
  hb->add_option("--delta-max", dgrid.hi)->each([&](const std::string&) { d_grid = true; });
  hb->add_option("--count", dgrid.count)->each([&](const std::string&) { d_grid = true; });

  auto* dia = app.add_subcommand("diameter", "diameter-bound feasibility with witness");
  add_phi_options(dia, po);
  dia->add_option("--n", n, "dimension");
  dia->add_option("--budget", budget, "extra witness depths to search");

  auto* vol = app.add_subcommand("volume", "lower bound v(r) for metric balls");
  add_phi_options(vol, po);
  vol->add_option("--n", n, "dimension");
  vol->add_option("--r-min", rgrid.lo);
  vol->add_option("--r-max", rgrid.hi);
  vol->add_option("--count", rgrid.count);
  vol->add_option("--ell", ell, "witness depth");
  vol->add_option("--q", q, "witness last exponent");
  vol->add_option("--q-prime", q_prime, "exponent of the majorant");

  auto* lux = app.add_subcommand("luxemburg", "Luxemburg norm of a sampled density");
  add_phi_options(lux, po);
  lux->add_option("--n", n, "dimension (slowgrowth only)");
  lux->add_option("--density", density, "csv:path or kind:gamma[,grid[,dim]]");
  lux->add_option("--tail", tail, "points of the tail-bound curve (0: none)");

  auto* ver = app.add_subcommand("verify", "asymptotic example suite");

  auto* integ = app.add_subcommand("integrability", "first and second integrability conditions");
  add_phi_options(integ, po);
  integ->add_option("--n", n, "dimension");

  std::vector<const char*> cargs;
  for (auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(int(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  {
    ConstantLedger c;
    GeometryLedger geo;
    apply_ledger(g, c, geo);  // rejects bad ledgers before any work
  }

  if (*conj) return cmd_conjugate(g, po, n, s, sgrid, s_grid);
  if (*hb) return cmd_hbar(g, po, n, dgrid, d_grid);
  if (*dia) return cmd_diameter(g, po, n, budget);
  if (*vol) return cmd_volume(g, po, n, rgrid, ell, q, q_prime);
  if (*lux) return cmd_luxemburg(g, po, n, density, tail);
  if (*ver) return cmd_verify(g);
  if (*integ) return cmd_integrability(g, po, n);
  return kConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return kPrecondition;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kConfig;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  }
}
