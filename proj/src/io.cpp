#include "pathflux/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "pathflux/error.hpp"

namespace pathflux {

namespace {

// Flattens a nested array of the given shape, slowest axis first.
template <class T>
void flatten(const json& j, const std::vector<std::size_t>& dims, std::size_t depth, const std::string& where,
             std::vector<T>& out) {
  if (depth == dims.size()) {
    if (!j.is_number()) throw ValidationError(where + ": expected a number");
    if constexpr (std::is_same_v<T, int>) {
      if (!j.is_number_integer()) throw ValidationError(where + ": expected an integer code");
      out.push_back(j.get<int>());
    } else {
      out.push_back(j.get<double>());
    }
    return;
  }
  if (!j.is_array() || j.size() != dims[depth]) {
    std::ostringstream os;
    os << where << ": table not total (expected " << dims[depth] << " entries at this level)";
    throw ValidationError(os.str());
  }
  for (std::size_t i = 0; i < dims[depth]; ++i) flatten(j[i], dims, depth + 1, where + "[" + std::to_string(i) + "]", out);
}

template <class T>
json nest(const std::vector<T>& flat, const std::vector<std::size_t>& dims, std::size_t depth, std::size_t& pos) {
  if (depth == dims.size()) return json(flat[pos++]);
  json arr = json::array();
  for (std::size_t i = 0; i < dims[depth]; ++i) arr.push_back(nest(flat, dims, depth + 1, pos));
  return arr;
}

template <class T>
json nest(const std::vector<T>& flat, const std::vector<std::size_t>& dims) {
  std::size_t pos = 0;
  return nest(flat, dims, 0, pos);
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  return j.at(key);
}

int positive_int(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer() || v.get<long>() < 1) throw ValidationError(std::string(key) + " must be a positive integer");
  return v.get<int>();
}

std::vector<double> pmf_field(const json& noise, const char* key) {
  const json& v = field(noise, key);
  if (!v.is_array() || v.empty()) throw ValidationError(std::string("noise.") + key + ": expected a nonempty array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ValidationError(std::string("noise.") + key + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

DiscreteScm scm_from_json(const json& j) {
  try {
    DiscreteScm s;
    if (j.contains("schema_version") && j.at("schema_version") != kSchemaVersion)
      throw ValidationError("unsupported schema_version " + j.at("schema_version").dump());
    s.cards = Cards{positive_int(j, "card_w"), positive_int(j, "card_a"), positive_int(j, "card_z"), positive_int(j, "card_m")};
    const json& noise = field(j, "noise");
    s.noise_w = pmf_field(noise, "u_w");
    s.noise_a = pmf_field(noise, "u_a");
    s.noise_z = pmf_field(noise, "u_z");
    s.noise_m = pmf_field(noise, "u_m");
    s.noise_y = pmf_field(noise, "u_y");
    const auto W = static_cast<std::size_t>(s.cards.w), A = static_cast<std::size_t>(s.cards.a),
               Z = static_cast<std::size_t>(s.cards.z), M = static_cast<std::size_t>(s.cards.m);
    flatten(field(j, "f_w"), {s.support_w()}, 0, "f_w", s.f_w);
    flatten(field(j, "f_a"), {W, s.support_a()}, 0, "f_a", s.f_a);
    flatten(field(j, "f_z"), {A, W, s.support_z()}, 0, "f_z", s.f_z);
    flatten(field(j, "f_m"), {Z, A, W, s.support_m()}, 0, "f_m", s.f_m);
    flatten(field(j, "f_y"), {M, Z, A, W, s.support_y()}, 0, "f_y", s.f_y);
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed scm: ") + e.what());
  }
}

json scm_to_json(const DiscreteScm& s) {
  const auto W = static_cast<std::size_t>(s.cards.w), A = static_cast<std::size_t>(s.cards.a),
             Z = static_cast<std::size_t>(s.cards.z), M = static_cast<std::size_t>(s.cards.m);
  json j;
  j["schema_version"] = kSchemaVersion;
  j["card_w"] = s.cards.w;
  j["card_a"] = s.cards.a;
  j["card_z"] = s.cards.z;
  j["card_m"] = s.cards.m;
  j["noise"] = {{"u_w", s.noise_w}, {"u_a", s.noise_a}, {"u_z", s.noise_z}, {"u_m", s.noise_m}, {"u_y", s.noise_y}};
  j["f_w"] = s.f_w;
  j["f_a"] = nest(s.f_a, {W, s.support_a()});
  j["f_z"] = nest(s.f_z, {A, W, s.support_z()});
  j["f_m"] = nest(s.f_m, {Z, A, W, s.support_m()});
  j["f_y"] = nest(s.f_y, {M, Z, A, W, s.support_y()});
  return j;
}

DiscreteScm load_scm(const std::string& source) {
  if (is_builtin_scm(source)) return builtin_scm(source);
  std::ifstream in(source);
  if (!in) throw ValidationError("cannot open scm file '" + source + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("scm file '" + source + "' is not valid JSON: " + e.what());
  }
  return scm_from_json(j);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

bool parse_long(const std::string& s, long& v) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  std::istringstream is(s);
  is.imbue(std::locale::classic());
  is >> v;
  return !is.fail() && is.eof() && std::isfinite(v);
}

}  // namespace

LoadedData read_csv(std::istream& in, const CsvOptions& opts) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: missing header");
  const auto header = split_csv(line);
  auto col = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError("csv: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::vector<std::string> wcols = opts.w_columns.empty() ? std::vector<std::string>{"w"} : opts.w_columns;
  std::vector<std::size_t> wi;
  for (const auto& c : wcols) wi.push_back(col(c));
  const std::size_t ia = col("a"), iz = col("z"), im = col("m"), iy = col("y");

  std::vector<std::vector<long>> wkeys;
  std::vector<Observation> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    const std::size_t row = rows.size();
    auto fail = [&](const std::string& what) {
      std::ostringstream os;
      os << "csv row " << row << " (line " << lineno << "): " << what;
      throw ValidationError(os.str());
    };
    if (f.size() != header.size()) fail("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    auto code = [&](std::size_t k, const std::string& name) {
      long v = 0;
      if (!parse_long(f[k], v) || v < 0) fail("column " + name + " must be a nonnegative integer code, got '" + f[k] + "'");
      return v;
    };
    std::vector<long> key;
    for (std::size_t k = 0; k < wi.size(); ++k) key.push_back(code(wi[k], wcols[k]));
    Observation o;
    o.a = static_cast<int>(code(ia, "a"));
    o.z = static_cast<int>(code(iz, "z"));
    o.m = static_cast<int>(code(im, "m"));
    if (!parse_double(f[iy], o.y)) fail("column y must be a finite number, got '" + f[iy] + "'");
    wkeys.push_back(std::move(key));
    rows.push_back(o);
  }
  if (rows.empty()) throw ValidationError("csv: no data rows");

  LoadedData out;
  out.codebook.columns = wcols;
  if (opts.w_columns.empty()) {
    long wmax = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      rows[r].w = static_cast<int>(wkeys[r][0]);
      wmax = std::max(wmax, wkeys[r][0]);
    }
    for (long v = 0; v <= wmax; ++v) out.codebook.levels.push_back({v});
  } else {
    std::map<std::vector<long>, int> codes;
    for (const auto& k : wkeys) codes.emplace(k, 0);
    int next = 0;
    for (auto& [k, c] : codes) {
      c = next++;
      out.codebook.levels.push_back(k);
    }
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r].w = codes.at(wkeys[r]);
  }
  Cards c{0, 0, 0, 0};
  c.w = static_cast<int>(out.codebook.levels.size());
  for (const auto& o : rows) {
    c.a = std::max(c.a, o.a + 1);
    c.z = std::max(c.z, o.z + 1);
    c.m = std::max(c.m, o.m + 1);
  }
  out.data.cards = c;
  out.data.rows = std::move(rows);
  validate(out.data);
  return out;
}

LoadedData load_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file '" + path + "'");
  return read_csv(in, opts);
}

void write_csv(std::ostream& out, const Dataset& data) {
  out << "w,a,z,m,y\n";
  char buf[64];
  for (const auto& o : data.rows) {
    const auto r = std::to_chars(buf, buf + sizeof buf, o.y);
    out << o.w << ',' << o.a << ',' << o.z << ',' << o.m << ',' << std::string_view(buf, static_cast<std::size_t>(r.ptr - buf))
        << '\n';
  }
}

EstimatorConfig config_from_json(const json& j) {
  EstimatorConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  static const std::vector<std::string> known{"schema_version", "folds", "alpha", "epsilon", "regression",
                                              "seed", "ci_level", "w_columns", "cards"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ValidationError("unknown config key '" + k + "'");
  try {
    if (j.contains("folds")) {
      if (!j["folds"].is_number_integer() || j["folds"].get<long>() < 2) throw ValidationError("folds must be an integer >= 2");
      cfg.folds = j["folds"].get<std::size_t>();
    }
    if (j.contains("alpha")) cfg.nuisance.alpha = j["alpha"].get<double>();
    if (j.contains("epsilon")) cfg.nuisance.epsilon = j["epsilon"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("ci_level")) cfg.ci_level = j["ci_level"].get<double>();
    if (j.contains("regression")) {
      const json& r = j["regression"];
      if (r.is_string()) {
        cfg.nuisance.regression = parse_regression(r.get<std::string>());
      } else if (r.is_object()) {
        cfg.nuisance.regression = parse_regression(field(r, "kind").get<std::string>());
        if (r.contains("lambda")) cfg.nuisance.lambda = r["lambda"].get<double>();
      } else {
        throw ValidationError("regression must be a string or an object");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  if (!(cfg.ci_level > 0.0 && cfg.ci_level < 1.0)) throw ValidationError("ci_level must lie in (0, 1)");
  return cfg;
}

json config_to_json(const EstimatorConfig& cfg) {
  json j;
  j["folds"] = cfg.folds;
  j["alpha"] = cfg.nuisance.alpha;
  j["epsilon"] = cfg.nuisance.epsilon;
  j["regression"] = {{"kind", regression_name(cfg.nuisance.regression)}};
  if (cfg.nuisance.regression == RegressionKind::ridge_onehot) j["regression"]["lambda"] = cfg.nuisance.lambda;
  j["seed"] = cfg.seed;
  j["ci_level"] = cfg.ci_level;
  return j;
}

ExperimentSpec experiment_from_json(const json& j) {
  try {
    ExperimentSpec s;
    s.kind = parse_experiment(field(j, "kind").get<std::string>());
    if (j.contains("path")) s.path = parse_path(j["path"].get<std::string>());
    if (j.contains("target")) {
      const json& t = j["target"];
      s.target = t.is_array() ? TargetId{t.at(0).get<int>(), t.at(1).get<int>()} : parse_target(t.get<std::string>());
      require_valid(s.target);
    }
    if (j.contains("scm")) {
      const json& src = j["scm"];
      if (src.is_string()) {
        const std::string name = src.get<std::string>();
        s.scm = name == "random" ? ScmSource{ScmSource::Kind::random, ""}
                : is_builtin_scm(name) ? ScmSource{ScmSource::Kind::builtin, name}
                                       : ScmSource{ScmSource::Kind::file, name};
      } else {
        throw ValidationError("scm must be a builtin name, a file path or \"random\"");
      }
    }
    if (j.contains("replications")) s.replications = j["replications"].get<std::size_t>();
    if (j.contains("n_grid")) s.n_grid = j["n_grid"].get<std::vector<std::size_t>>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("estimator")) s.estimator = config_from_json(j["estimator"]);
    if (j.contains("data")) s.data_path = j["data"].get<std::string>();
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed experiment spec: ") + e.what());
  }
}

json experiment_to_json(const ExperimentSpec& s) {
  json j;
  j["kind"] = experiment_name(s.kind);
  j["path"] = path_name(s.path);
  j["target"] = {s.target.j, s.target.k};
  j["scm"] = s.scm.kind == ScmSource::Kind::random ? std::string("random") : s.scm.name;
  j["replications"] = s.replications;
  j["n_grid"] = s.n_grid;
  j["seed"] = s.seed;
  j["estimator"] = config_to_json(s.estimator);
  if (!s.data_path.empty()) j["data"] = s.data_path;
  return j;
}

json to_json(const EstimateReport& r) {
  return json{{"estimate", r.point}, {"se", r.se},         {"ci_lo", r.ci_lo}, {"ci_hi", r.ci_hi},
              {"level", r.level},    {"n", r.n},           {"folds", r.folds}, {"fold_estimates", r.fold_points}};
}

json to_json(const DecompositionReport& r) {
  json j;
  j["theta"] = to_json(r.theta);
  j["theta_P1"] = to_json(r.p1);
  j["theta_P2"] = to_json(r.p2);
  j["theta_P3"] = to_json(r.p3);
  j["theta_P4"] = to_json(r.p4);
  j["theta_P2_or_P3"] = to_json(r.p2_or_p3);
  j["telescoping_gap"] = r.telescoping_gap();
  return j;
}

json to_json(const AteReport& r) {
  json j;
  j["psi"] = to_json(r.psi);
  j["psi_P1"] = to_json(r.p1);
  j["psi_P2"] = to_json(r.p2);
  j["psi_P3"] = to_json(r.p3);
  j["psi_P4"] = to_json(r.p4);
  j["psi_P2_or_P3"] = to_json(r.p2_or_p3);
  json means;
  for (std::size_t k = 0; k < 8; ++k) means[std::string(ate_mean_name(kAllAteMeans[k]))] = to_json(r.means[k]);
  j["means"] = means;
  j["telescoping_gap"] = r.telescoping_gap();
  return j;
}

json to_json(const TotalInfluenceReport& r) {
  json j;
  j["theta"] = to_json(r.theta);
  j["tau"] = to_json(r.tau_conf);
  json curve = json::object();
  for (std::size_t a = 0; a < r.f_curve.size(); ++a)
    curve[std::to_string(a)] = r.f_curve[a] ? to_json(*r.f_curve[a]) : json(nullptr);
  j["f_curve"] = curve;
  return j;
}

json to_json(const PathComponents& c) {
  return json{{"theta", c.theta},       {"theta_P1", c.p1}, {"theta_P2", c.p2},
              {"theta_P3", c.p3},       {"theta_P4", c.p4}, {"theta_P2_or_P3", c.p2_or_p3},
              {"additivity_gap", c.additivity_gap()}, {"sum_check", std::abs(c.additivity_gap()) <= 1e-12}};
}

json to_json(const AteComponents& c) {
  return json{{"psi", c.psi},           {"psi_P1", c.p1}, {"psi_P2", c.p2},
              {"psi_P3", c.p3},         {"psi_P4", c.p4}, {"psi_P2_or_P3", c.p2_or_p3},
              {"additivity_gap", c.additivity_gap()}, {"sum_check", std::abs(c.additivity_gap()) <= 1e-12}};
}

json to_json(const ExperimentReport& r) {
  json j;
  j["kind"] = r.kind;
  j["verdict"] = r.verdict;
  j["pass"] = r.pass;
  j["aggregate"] = r.aggregate;
  j["tolerances"] = r.tolerances;
  j["replications"] = r.replications;
  return j;
}

json to_json(const WCodebook& cb) {
  json j;
  j["columns"] = cb.columns;
  j["levels"] = cb.levels;
  return j;
}

}  // namespace pathflux
