#pragma once

// File formats: dataset CSV, model JSON, path CSV, survival-curve CSV,
// benchmark results CSV and the simulation truth sidecar. Every file carries
// a format_version.

#include "icnet/simgen.hpp"
#include "icnet/survival.hpp"
#include "icnet/trainer.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace icnet {

inline constexpr int kFormatVersion = 1;

// Column names accepted as covariates besides z1, z2, ...
const std::vector<std::string>& known_covariate_columns();

struct CsvReadOptions {
  std::vector<std::string> allow_columns;  // extra accepted covariate names
};

struct NamedDataset {
  Dataset data;
  std::vector<std::string> covariate_names;
};

// Covariates only, for prediction inputs; outcome columns are ignored.
struct CovariateTable {
  Dataset::Matrix z;
  std::vector<std::string> names;
};

// Shortest representation that parses back to the same double.
std::string format_double(double x);

NamedDataset read_dataset_csv(std::istream& in, const CsvReadOptions& opts = {});
NamedDataset read_dataset_csv(const std::string& path, const CsvReadOptions& opts = {});
CovariateTable read_covariates_csv(const std::string& path, const CsvReadOptions& opts = {});

std::vector<std::string> default_covariate_names(int d);
void write_dataset_csv(std::ostream& out, const Dataset& data, const std::vector<std::string>& names);
void write_dataset_csv(const std::string& path, const Dataset& data, const std::vector<std::string>& names);

struct ModelFile {
  FittedModel model;
  std::vector<std::string> covariate_names;
};

std::string model_to_json(const FittedModel& model, const std::vector<std::string>& names);
// Rejects malformed files and models violating the hierarchy constraint.
ModelFile model_from_json(const std::string& text);
void save_model(const std::string& path, const FittedModel& model, const std::vector<std::string>& names);
ModelFile load_model(const std::string& path);

void write_path_csv(std::ostream& out, const PathResult& path);
void write_path_csv(const std::string& file, const PathResult& path);

void write_survival_csv(std::ostream& out, const std::vector<std::vector<double>>& curves,
                        const std::vector<double>& times);

std::string truth_to_json(const SimTruth& truth, const SimConfig& cfg);
SimTruth truth_from_json(const std::string& text);
void save_truth(const std::string& path, const SimTruth& truth, const SimConfig& cfg);
SimTruth load_truth(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace icnet
