#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "dynent/channel.hpp"
#include "dynent/measures.hpp"
#include "dynent/superchannel.hpp"

using nlohmann::json;
using namespace dynent;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::vector<std::string> channels;
  double eps = 0.0;
  double delta = 1.0;
  int k = 0;
  int l = 2;
  int pairs = 20;
  uint64_t seed = 7;
  double tol = 1e-7;
  std::string out;
  std::string format = "json";
};

std::vector<int> parse_dims(const std::string& s) {
  std::vector<int> dims;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) dims.push_back(std::stoi(tok));
  return dims;
}

// Builtin specs: swap:K, identity:a,b, depolarizing:a,b:p,
// random:a,b,c,d:seed, sep-random:a,b,c,d:seed:terms; anything else is read
// as a channel JSON file path.
BipartiteChannel parse_channel(const std::string& spec) {
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    return parts;
  };
  std::vector<std::string> p = split(spec);
  try {
    if (p.size() == 2 && p[0] == "swap") return swap_channel(std::stoi(p[1]));
    if (p.size() == 2 && p[0] == "identity") {
      auto d = parse_dims(p[1]);
      return identity_channel(d.at(0), d.at(1));
    }
    if (p.size() == 3 && p[0] == "depolarizing") {
      auto d = parse_dims(p[1]);
      return depolarizing_channel(d.at(0), d.at(1), std::stod(p[2]));
    }
    if (p.size() == 3 && p[0] == "random") {
      auto d = parse_dims(p[1]);
      return random_channel({d.at(0), d.at(1), d.at(2), d.at(3)},
                            std::stoull(p[2]));
    }
    if (p.size() == 4 && p[0] == "sep-random") {
      auto d = parse_dims(p[1]);
      return random_separable_channel({d.at(0), d.at(1), d.at(2), d.at(3)},
                                      std::stoull(p[2]), std::stoi(p[3]));
    }
  } catch (const std::exception& e) {
    throw CLI::ValidationError("channel",
                               "bad builtin channel spec '" + spec + "'");
  }
  if (!std::filesystem::exists(spec))
    throw CLI::ValidationError(
        "channel", "'" + spec + "' is neither a builtin spec nor a file");
  return load_channel(spec);
}

json report_json(const MeasureReport& r) {
  return json::parse(report_to_json(r));
}

json base_report(const std::string& command, const Options& o) {
  json j;
  j["command"] = command;
  j["library_version"] = kVersion;
  j["solver"] = {{"tol", o.tol}, {"max_iter", 200}};
  j["seed"] = o.seed;
  return j;
}

void print_table(const json& j, std::ostream& os, std::string prefix = "") {
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      print_table(*it, os, key);
    } else {
      os << "  " << key;
      for (size_t n = key.size(); n < 36; ++n) os << ' ';
      os << it->dump() << "\n";
    }
  }
}

int emit(const json& j, const Options& o, bool ok) {
  std::ostream* os = &std::cout;
  std::ofstream f;
  if (!o.out.empty()) {
    f.open(o.out);
    if (!f) {
      std::cerr << "cannot open output path " << o.out << "\n";
      return 2;
    }
    os = &f;
  }
  if (o.format == "table") {
    (*os) << "== " << j.at("command").get<std::string>() << " ==\n";
    print_table(j, *os);
  } else {
    (*os) << j.dump(2) << "\n";
  }
  return ok ? 0 : 1;
}

// ---- commands ----

int cmd_golden_units(const Options& o) {
  json j = base_report("golden-units", o);
  bool ok = true;
  int kmax = o.k > 0 ? o.k : 3;
  for (int k = 2; k <= kmax; ++k) {
    RobustnessResult rs = standard_robustness(swap_channel(k), o.tol);
    double want = double(k) * k - 1.0;
    j["swap"][std::to_string(k)] = {{"standard_robustness", rs.s},
                                    {"expected", want},
                                    {"report", report_json(rs.report)}};
    ok = ok && std::abs(rs.s - want) < 1e-5;
  }
  // isotropic separability threshold at p = 1/K via PT-eigenvalue bisection
  {
    int k = 2;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 40; ++it) {
      double mid = 0.5 * (lo + hi);
      DensityOperator iso = isotropic_state(k, mid);
      double mev = min_eigenvalue(
          partial_transpose(iso.matrix, iso.dims, {1}));
      (mev >= 0 ? lo : hi) = mid;
    }
    j["isotropic_threshold"] = {{"K", k}, {"p", 0.5 * (lo + hi)},
                               {"expected", 1.0 / k}};
    ok = ok && std::abs(0.5 * (lo + hi) - 0.5) < 1e-6;
  }
  j["pass"] = ok;
  return emit(j, o, ok);
}

int cmd_robustness(const Options& o) {
  BipartiteChannel n = parse_channel(o.channels.at(0));
  json j = base_report("robustness", o);
  RobustnessResult rs = standard_robustness(n, o.tol);
  RobustnessResult rg = generalized_robustness(n, o.tol);
  j["standard"] = report_json(rs.report);
  j["generalized"] = report_json(rg.report);
  if (o.eps > 0) {
    SmoothedResult sm =
        smoothed_log_robustness(n, o.eps, RobustKind::standard, o.tol);
    j["smoothed_log"] = report_json(sm.report);
  }
  j["pass"] = true;
  return emit(j, o, true);
}

int cmd_diamond(const Options& o) {
  if (o.channels.size() != 2)
    throw CLI::ValidationError("channel", "diamond needs two --channel specs");
  BipartiteChannel a = parse_channel(o.channels[0]);
  BipartiteChannel b = parse_channel(o.channels[1]);
  json j = base_report("diamond", o);
  j["half_diamond_distance"] = diamond_distance(a, b, o.tol);
  j["pass"] = true;
  return emit(j, o, true);
}

int cmd_cost_bounds(const Options& o) {
  BipartiteChannel n = parse_channel(o.channels.at(0));
  CostReport r = cost_bound_harness(n, o.eps, o.seed, 4);
  json j = base_report("cost-bounds", o);
  j["epsilon"] = o.eps;
  j["lower"] = r.lower;
  j["realized"] = r.realized;
  j["upper"] = r.upper;
  j["k"] = r.k;
  j["sim_residual"] = r.sim_residual;
  j["robustness"] = report_json(r.robustness);
  j["cert"] = {{"samples", r.cert.samples},
               {"max_output_robustness", r.cert.max_output_robustness},
               {"pass", r.cert.pass}};
  bool ok = r.realized >= r.lower - 1e-5 && r.realized <= r.upper + 1e-5 &&
            r.cert.pass;
  j["pass"] = ok;
  return emit(j, o, ok);
}

int cmd_distill_bounds(const Options& o) {
  BipartiteChannel n = parse_channel(o.channels.at(0));
  DistillReport r = distill_bound_harness(n, o.eps, 3, o.seed);
  json j = base_report("distill-bounds", o);
  j["epsilon"] = o.eps;
  j["eh_eps"] = r.eh_eps;
  j["eh_two_eps"] = r.eh_two_eps;
  j["lower"] = r.lower;
  j["realized"] = r.realized;
  j["k"] = r.k;
  j["diamond_err"] = r.diamond_err;
  j["eh_report"] = report_json(r.eh_report);
  bool ok = r.realized >= r.lower - 1e-5 && r.diamond_err <= o.eps + 1e-6;
  j["pass"] = ok;
  return emit(j, o, ok);
}

int cmd_catalysis(const Options& o) {
  BipartiteChannel n = parse_channel(o.channels.at(0));
  auto [theta, r] = catalytic_dilution(n, o.l, o.delta, o.eps, o.tol);
  json j = base_report("catalysis", o);
  j["l"] = r.l;
  j["k"] = r.k;
  j["delta"] = o.delta;
  j["epsilon"] = o.eps;
  j["eps_prime"] = r.eps_prime;
  j["lower"] = r.lower;
  j["realized"] = r.realized;
  j["upper"] = r.upper;
  j["miss_robustness"] = r.miss_robustness;
  TwirlStructure ts = composite_twirl_structure(n.dims, o.l);
  SeppscCertificate cert;
  bool have_cov = n.dims[0] == n.dims[3] && n.dims[1] == n.dims[2];
  cert = seppsc_certify(theta, 20, o.delta, o.seed,
                        have_cov ? &ts : nullptr);
  j["cert"] = {{"samples", cert.samples},
               {"max_output_robustness", cert.max_output_robustness},
               {"pass", cert.pass}};
  bool ok = cert.pass && r.realized >= r.lower - 1e-5 &&
            r.realized <= r.upper + 1e-5;
  j["pass"] = ok;
  return emit(j, o, ok);
}

int cmd_eh(const Options& o) {
  BipartiteChannel n = parse_channel(o.channels.at(0));
  EhResult r = eh_maximize(n, o.eps, 3, o.seed, {}, o.tol);
  json j = base_report("eh", o);
  j["eh"] = report_json(r.report);
  j["pass"] = true;
  return emit(j, o, true);
}

int cmd_inequalities(const Options& o) {
  json j = base_report("inequalities", o);
  std::mt19937_64 rng(o.seed);
  int violations = 0;
  double worst = 0.0;
  for (int i = 0; i < o.pairs; ++i) {
    BipartiteChannel a = random_channel({2, 2, 2, 2}, rng());
    BipartiteChannel b = random_channel({2, 2, 2, 2}, rng());
    TransferCheck tc = fidelity_diamond_transfer_check(a, b, 4, rng());
    worst = std::max({worst, tc.fidelity_slack, tc.choi_slack});
    if (tc.fidelity_slack > 1e-8 || tc.choi_slack > 1e-8) ++violations;
  }
  j["pairs"] = o.pairs;
  j["violations"] = violations;
  j["worst_slack"] = worst;
  bool ok = violations == 0;
  j["pass"] = ok;
  return emit(j, o, ok);
}

int cmd_monotonicity(const Options& o) {
  json j = base_report("monotonicity", o);
  std::mt19937_64 rng(o.seed);
  double worst = 0.0;
  int violations = 0;
  for (int i = 0; i < o.pairs; ++i) {
    BipartiteChannel n = random_channel({2, 2, 2, 2}, rng());
    Superchannel th = random_seppsc({2, 2, 2, 2}, rng());
    double before = log_robustness(n, RobustKind::generalized, o.tol);
    double after = log_robustness(apply_superchannel(th, n),
                                  RobustKind::generalized, o.tol);
    worst = std::max(worst, after - before);
    if (after > before + 1e-5) ++violations;
  }
  j["pairs"] = o.pairs;
  j["violations"] = violations;
  j["worst_growth"] = worst;
  bool ok = violations == 0;
  j["pass"] = ok;
  return emit(j, o, ok);
}

int cmd_twirl(const Options& o) {
  BipartiteChannel n = parse_channel(o.channels.at(0));
  TwirlStructure ts = standard_twirl_structure(n.dims);
  TwirlDecomposition dec = twirl_project(n.choi, ts);
  json j = base_report("twirl", o);
  j["coeffs"] = dec.coeffs;
  j["residual"] = dec.residual;
  j["pass"] = true;
  return emit(j, o, true);
}

int cmd_mes_overlap(const Options& o) {
  int k = o.k > 0 ? o.k : 2;
  json j = base_report("mes-overlap", o);
  double v = mes_overlap_ppt(k, o.tol);
  j["K"] = k;
  j["value"] = v;
  j["expected"] = 1.0 / k;
  bool ok = std::abs(v - 1.0 / k) < 1e-6;
  j["pass"] = ok;
  return emit(j, o, ok);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dynent: one-shot dynamic entanglement of bipartite channels.\n"
      "Each command corresponds to one section of README.md (see the\n"
      "'Command reference' table there for the underlying bound)."};
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* c, bool needs_channel) {
    if (needs_channel)
      c->add_option("--channel", o.channels,
                    "channel: builtin spec (swap:K, identity:a,b, "
                    "depolarizing:a,b:p, random:a,b,c,d:seed, "
                    "sep-random:a,b,c,d:seed:terms) or a JSON file path")
          ->required();
    c->add_option("--eps", o.eps, "smoothing / error parameter");
    c->add_option("--delta", o.delta, "free-operation slack delta");
    c->add_option("--k", o.k, "unit size K");
    c->add_option("--l", o.l, "catalyst size L");
    c->add_option("--pairs", o.pairs, "number of sampled pairs");
    c->add_option("--seed", o.seed, "RNG seed (reports are byte-identical "
                                    "for a fixed config and seed)");
    c->add_option("--tol", o.tol, "solver tolerance");
    c->add_option("--out", o.out, "write the report to this path");
    c->add_option("--format", o.format, "json or table")
        ->check(CLI::IsMember({"json", "table"}));
  };

  struct Cmd {
    const char* name;
    const char* desc;
    int (*fn)(const Options&);
    bool channel;
  };
  const Cmd cmds[] = {
      {"golden-units",
       "closed-form checks: swap robustness K^2-1, isotropic threshold 1/K "
       "(README: Golden units)",
       cmd_golden_units, false},
      {"robustness",
       "standard/generalized (and smoothed) PPT robustness of a channel "
       "(README: Robustness measures)",
       cmd_robustness, true},
      {"diamond",
       "half diamond distance between two channels (README: Distances)",
       cmd_diamond, true},
      {"cost-bounds",
       "one-shot dilution cost sandwich and the achieving superchannel "
       "(README: Dilution)",
       cmd_cost_bounds, true},
      {"distill-bounds",
       "one-shot distillation sandwich via hypothesis testing (README: "
       "Distillation)",
       cmd_distill_bounds, true},
      {"catalysis",
       "catalytic dilution with an F^L catalyst (README: Catalysis)",
       cmd_catalysis, true},
      {"eh",
       "hypothesis-testing entanglement of a channel, heuristic outer "
       "maximization (README: Hypothesis testing)",
       cmd_eh, true},
      {"inequalities",
       "fidelity/diamond transfer inequality suite on random pairs (README: "
       "Inequality suites)",
       cmd_inequalities, false},
      {"monotonicity",
       "robustness monotonicity under sampled free superchannels (README: "
       "Monotonicity)",
       cmd_monotonicity, false},
      {"twirl",
       "pair-twirl decomposition of a channel (README: Twirling)",
       cmd_twirl, true},
      {"mes-overlap",
       "PPT maximum overlap with the K-dim MES, equals 1/K (README: Golden "
       "units)",
       cmd_mes_overlap, false},
  };
  for (const Cmd& c : cmds) add_common(app.add_subcommand(c.name, c.desc),
                                       c.channel);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const Cmd& c : cmds)
      if (app.got_subcommand(c.name)) return c.fn(o);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "bad input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    json fail;
    fail["error"] = e.what();
    std::cerr << fail.dump() << "\n";
    return 1;
  }
  return 2;
}
