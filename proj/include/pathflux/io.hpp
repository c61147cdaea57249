#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "pathflux/counterfactual.hpp"
#include "pathflux/dataset.hpp"
#include "pathflux/estimator.hpp"
#include "pathflux/scm.hpp"
#include "pathflux/verify.hpp"

namespace pathflux {

inline constexpr int kSchemaVersion = 1;

using nlohmann::json;

DiscreteScm scm_from_json(const json& j);
json scm_to_json(const DiscreteScm& scm);
DiscreteScm load_scm(const std::string& source);  // builtin name or file path

// Maps the joint levels of several W columns to one code.
struct WCodebook {
  std::vector<std::string> columns;
  std::vector<std::vector<long>> levels;  // code -> original column values
};

struct CsvOptions {
  std::vector<std::string> w_columns;  // empty: a single `w` column
};

struct LoadedData {
  Dataset data;
  WCodebook codebook;
};

// Reads a CSV with columns a, z, m, y and either w or the configured W columns. Cards are
// the observed maxima plus one. Throws ValidationError naming the offending line.
LoadedData read_csv(std::istream& in, const CsvOptions& opts = {});
LoadedData load_csv(const std::string& path, const CsvOptions& opts = {});
void write_csv(std::ostream& out, const Dataset& data);

EstimatorConfig config_from_json(const json& j);
json config_to_json(const EstimatorConfig& cfg);

ExperimentSpec experiment_from_json(const json& j);
json experiment_to_json(const ExperimentSpec& spec);

json to_json(const EstimateReport& r);
json to_json(const DecompositionReport& r);
json to_json(const AteReport& r);
json to_json(const TotalInfluenceReport& r);
json to_json(const PathComponents& c);
json to_json(const AteComponents& c);
json to_json(const ExperimentReport& r);
json to_json(const WCodebook& cb);

}  // namespace pathflux
