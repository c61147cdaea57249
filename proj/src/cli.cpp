#include "pathflux/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "pathflux/counterfactual.hpp"
#include "pathflux/error.hpp"
#include "pathflux/estimator.hpp"
#include "pathflux/io.hpp"
#include "pathflux/parallel.hpp"
#include "pathflux/scm.hpp"
#include "pathflux/verify.hpp"

namespace pathflux {

namespace {

json read_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + what + " '" + path + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ValidationError(what + " '" + path + "' is not valid JSON: " + e.what());
  }
}

// Writes to `path`, or to `out` when the path is empty.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << text;
  if (!f) throw ValidationError("write to '" + path + "' failed");
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (width.size() <= c) width.push_back(0);
      width[c] = std::max(width[c], r[c].size());
    }
  std::ostringstream os;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      if (c == 0)
        os << std::left << std::setw(static_cast<int>(width[c])) << rows[i][c];
      else
        os << "  " << std::right << std::setw(static_cast<int>(width[c])) << rows[i][c];
    }
    os << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
  return os.str();
}

std::vector<std::string> estimate_row(const std::string& name, const EstimateReport& r) {
  return {name, fmt(r.point), fmt(r.se), "[" + fmt(r.ci_lo) + ", " + fmt(r.ci_hi) + "]"};
}

Weight parse_weight(const std::string& text, int card_a) {
  if (text == "identity") return Weight::identity(card_a);
  if (text == "unit") return Weight::unit(card_a);
  const std::string prefix = "indicator:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string lvl = text.substr(prefix.size());
    int a = -1;
    try {
      std::size_t pos = 0;
      a = std::stoi(lvl, &pos);
      if (pos != lvl.size()) a = -1;
    } catch (const std::exception&) {
    }
    if (a < 0 || a >= card_a) throw ValidationError("weight indicator level '" + lvl + "' outside 0.." + std::to_string(card_a - 1));
    return Weight::indicator(a, card_a);
  }
  throw ValidationError("unknown weight '" + text + "' (identity, unit or indicator:<a>)");
}

Cards cards_from_json(const json& j) {
  auto get = [&](const char* k) {
    if (!j.contains(k) || !j[k].is_number_integer() || j[k].get<long>() < 1)
      throw ValidationError(std::string("config cards.") + k + " must be a positive integer");
    return j[k].get<int>();
  };
  return Cards{get("w"), get("a"), get("z"), get("m")};
}

json provenance(const std::string& command) {
  return json{{"tool", "pathflux"}, {"command", command}, {"schema_version", kSchemaVersion}};
}

struct Options {
  std::string format = "json";
  std::string out;
  unsigned threads = 0;

  // simulate / oracle
  std::string scm = "t1";
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  bool seed_given = false;
  bool ate = false;
  std::string z_reading = "coupled";

  // estimate
  std::string data;
  std::string config;
  std::string target;
  std::string weight = "identity";
  std::optional<std::size_t> folds;
  std::optional<double> ci_level;

  // verify
  std::string spec;
};

int cmd_simulate(const Options& o, std::ostream& out) {
  const DiscreteScm scm = load_scm(o.scm);
  if (o.n == 0) throw ValidationError("n must be positive");
  const Dataset d = sample(scm, o.n, o.seed);
  std::ostringstream csv;
  write_csv(csv, d);
  emit(csv.str(), o.out, out);
  if (!o.out.empty()) {
    json p = provenance("simulate");
    p["scm"] = o.scm;
    p["n"] = o.n;
    p["seed"] = o.seed;
    p["scm_definition"] = scm_to_json(scm);
    emit(p.dump(2) + "\n", o.out + ".provenance.json", out);
  }
  return kExitOk;
}

int cmd_oracle(const Options& o, std::ostream& out) {
  const DiscreteScm scm = load_scm(o.scm);
  OracleOptions opts;
  if (o.z_reading == "coupled")
    opts.z_reading = ZDrawReading::coupled;
  else if (o.z_reading == "marginal")
    opts.z_reading = ZDrawReading::marginal;
  else
    throw ValidationError("z-reading must be coupled or marginal");
  if (o.ate && scm.cards.a != 2)
    throw ValidationError("ATE decomposition needs binary A, got card_a = " + std::to_string(scm.cards.a));

  const PathComponents pc = oracle_path_decomposition(scm, opts);
  const TotalInfluence ti = oracle_total_influence(scm, opts);
  json j;
  j["schema_version"] = kSchemaVersion;
  json p = provenance("oracle");
  p["scm"] = o.scm;
  p["z_reading"] = o.z_reading;
  p["scm_definition"] = scm_to_json(scm);
  j["provenance"] = p;
  j["decomposition"] = to_json(pc);
  j["tau"] = ti.tau_conf;
  j["cov_ay"] = ti.theta + ti.tau_conf;
  std::optional<AteComponents> ac;
  if (o.ate) {
    ac = oracle_ate_decomposition(scm, opts);
    j["ate"] = to_json(*ac);
  }

  if (o.format == "table") {
    std::vector<std::vector<std::string>> rows{{"Parameter", "Value"},
                                               {"theta", fmt(pc.theta)},
                                               {"theta_P1", fmt(pc.p1)},
                                               {"theta_P2", fmt(pc.p2)},
                                               {"theta_P3", fmt(pc.p3)},
                                               {"theta_P4", fmt(pc.p4)},
                                               {"theta_P2_or_P3", fmt(pc.p2_or_p3)},
                                               {"tau", fmt(ti.tau_conf)}};
    if (ac) {
      rows.push_back({"psi", fmt(ac->psi)});
      rows.push_back({"psi_P1", fmt(ac->p1)});
      rows.push_back({"psi_P2", fmt(ac->p2)});
      rows.push_back({"psi_P3", fmt(ac->p3)});
      rows.push_back({"psi_P4", fmt(ac->p4)});
      rows.push_back({"psi_P2_or_P3", fmt(ac->p2_or_p3)});
    }
    emit(render_table(rows), o.out, out);
  } else {
    emit(j.dump(2) + "\n", o.out, out);
  }
  return kExitOk;
}

int cmd_estimate(const Options& o, std::ostream& out) {
  json cj = o.config.empty() ? json(nullptr) : read_json_file(o.config, "config");
  EstimatorConfig cfg = config_from_json(cj);
  CsvOptions csv;
  std::optional<Cards> declared;
  if (cj.is_object()) {
    if (cj.contains("w_columns")) {
      try {
        csv.w_columns = cj["w_columns"].get<std::vector<std::string>>();
      } catch (const json::exception&) {
        throw ValidationError("w_columns must be an array of column names");
      }
    }
    if (cj.contains("cards")) declared = cards_from_json(cj["cards"]);
  }
  if (o.seed_given) cfg.seed = o.seed;
  if (o.folds) cfg.folds = *o.folds;
  if (o.ci_level) cfg.ci_level = *o.ci_level;

  LoadedData loaded = load_csv(o.data, csv);
  Dataset& data = loaded.data;
  if (declared) {
    if (!csv.w_columns.empty()) declared->w = std::max(declared->w, data.cards.w);
    data.cards = *declared;
    validate(data);
  }
  validate(cfg, data);
  if (o.ate && data.cards.a != 2)
    throw ValidationError("ATE decomposition needs binary A, got card_a = " + std::to_string(data.cards.a));

  const CrossFit cf = cross_fit(data, cfg);
  const DecompositionReport dr = decompose_paths(data, cf, cfg);
  const TotalInfluenceReport tr = total_influence(data, cf, cfg);
  std::optional<AteReport> ar;
  if (o.ate) ar = decompose_ate(data, cf, cfg);
  std::optional<EstimateReport> single;
  TargetId t{};
  std::optional<Weight> w;
  if (!o.target.empty()) {
    t = parse_target(o.target);
    require_valid(t);
    w = parse_weight(o.weight, data.cards.a);
    single = estimate_tau(data, cf, t, *w, cfg);
  }

  json j;
  j["schema_version"] = kSchemaVersion;
  json p = provenance("estimate");
  p["data"] = o.data;
  p["n"] = data.size();
  p["cards"] = {{"w", data.cards.w}, {"a", data.cards.a}, {"z", data.cards.z}, {"m", data.cards.m}};
  p["config"] = config_to_json(cfg);
  p["seed"] = cfg.seed;
  p["w_codebook"] = to_json(loaded.codebook);
  j["provenance"] = p;
  j["decomposition"] = to_json(dr);
  j["total_influence"] = to_json(tr);
  if (ar) j["ate"] = to_json(*ar);
  if (single) {
    json s = to_json(*single);
    s["target"] = t.name();
    s["weight"] = w->name();
    j["target"] = s;
  }

  if (o.format == "table") {
    std::ostringstream lvl;
    lvl << cfg.ci_level * 100 << "% CI";
    std::vector<std::vector<std::string>> rows{{"Parameter", "Estimate", "SE", lvl.str()},
                                               estimate_row("theta", dr.theta),
                                               estimate_row("theta_P1", dr.p1),
                                               estimate_row("theta_P2", dr.p2),
                                               estimate_row("theta_P3", dr.p3),
                                               estimate_row("theta_P4", dr.p4),
                                               estimate_row("theta_P2_or_P3", dr.p2_or_p3),
                                               estimate_row("tau", tr.tau_conf)};
    if (ar) {
      rows.push_back(estimate_row("psi", ar->psi));
      rows.push_back(estimate_row("psi_P1", ar->p1));
      rows.push_back(estimate_row("psi_P2", ar->p2));
      rows.push_back(estimate_row("psi_P3", ar->p3));
      rows.push_back(estimate_row("psi_P4", ar->p4));
      rows.push_back(estimate_row("psi_P2_or_P3", ar->p2_or_p3));
    }
    if (single) rows.push_back(estimate_row(t.name() + " " + w->name(), *single));
    emit(render_table(rows), o.out, out);
  } else {
    emit(j.dump(2) + "\n", o.out, out);
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  ExperimentSpec spec = experiment_from_json(read_json_file(o.spec, "experiment spec"));
  if (o.seed_given) spec.seed = o.seed;
  const ExperimentReport r = run_experiment(spec);
  json j;
  j["schema_version"] = kSchemaVersion;
  json p = provenance("verify");
  p["spec"] = experiment_to_json(spec);
  p["seed"] = spec.seed;
  j["provenance"] = p;
  j["report"] = to_json(r);
  if (o.format == "table") {
    std::vector<std::vector<std::string>> rows{{"Metric", "Value"}};
    for (const auto& [k, v] : r.aggregate) rows.push_back({k, fmt(v, 10)});
    for (const auto& [k, v] : r.tolerances) rows.push_back({"tolerance " + k, fmt(v, 12)});
    emit(render_table(rows) + "verdict: " + r.verdict + "\n", o.out, out);
  } else {
    emit(j.dump(2) + "\n", o.out, out);
  }
  return r.pass ? kExitOk : kExitFailedVerdict;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Path-specific causal influence: simulation, oracle, estimation and verification", "pathflux"};
  app.require_subcommand(1);
  app.add_option("--threads", o.threads, "Worker threads (0: hardware concurrency)");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out,-o", o.out, "Output file (default stdout)");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "table"}));
  };

  CLI::App* sim = app.add_subcommand("simulate", "Draw an i.i.d. dataset from an SCM");
  sim->add_option("--scm", o.scm, "Builtin name (t0, t1) or SCM JSON file")->required();
  sim->add_option("--n", o.n, "Number of rows")->required();
  sim->add_option("--seed", o.seed, "Seed");
  sim->add_option("--out,-o", o.out, "Output CSV (default stdout)");

  CLI::App* orc = app.add_subcommand("oracle", "Exact decomposition from an SCM");
  orc->add_option("--scm", o.scm, "Builtin name (t0, t1) or SCM JSON file")->required();
  orc->add_flag("--ate", o.ate, "Also decompose the ATE (binary A)");
  orc->add_option("--z-reading", o.z_reading, "Z emulation draw: coupled or marginal");
  add_common(orc);

  CLI::App* est = app.add_subcommand("estimate", "Cross-fitted one-step estimates from a CSV");
  est->add_option("--data", o.data, "Dataset CSV")->required();
  est->add_option("--config", o.config, "Estimator config JSON");
  auto* seed_opt = est->add_option("--seed", o.seed, "Fold seed (overrides config)");
  est->add_option("--folds", o.folds, "Number of folds (overrides config)");
  est->add_option("--ci-level", o.ci_level, "Interval coverage (overrides config)");
  est->add_flag("--ate", o.ate, "Also decompose the ATE (binary A)");
  est->add_option("--target", o.target, "Single target j,k");
  est->add_option("--weight", o.weight, "identity, unit or indicator:<a>");
  add_common(est);

  CLI::App* ver = app.add_subcommand("verify", "Run an experiment spec");
  ver->add_option("--spec,spec", o.spec, "Experiment spec JSON")->required();
  auto* vseed_opt = ver->add_option("--seed", o.seed, "Seed (overrides spec)");
  add_common(ver);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  o.seed_given = seed_opt->count() > 0 || vseed_opt->count() > 0;

  try {
    if (o.threads > 0) set_thread_count(o.threads);
    if (*sim) return cmd_simulate(o, out);
    if (*orc) return cmd_oracle(o, out);
    if (*est) return cmd_estimate(o, out);
    if (*ver) return cmd_verify(o, out);
  } catch (const NumericalGuardError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace pathflux
