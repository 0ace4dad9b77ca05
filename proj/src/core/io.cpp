#include "icnet/io.hpp"

#include "icnet/errors.hpp"
#include "icnet/hierprox.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace icnet {

using nlohmann::json;

const std::vector<std::string>& known_covariate_columns() {
  // NHANES variable codes.
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v{"Gender", "Cancer", "Stroke", "Diabetes", "BMI",  "CHF",  "CHD",    "MobilityProblem",
                               "RIDAGEYR", "LBXTC", "LBDHDD", "SYS",    "TAC",  "TLAC", "WT",     "ST",
                               "MVPA",   "ABout",  "SBout",  "SATP",     "ASTP"};
    for (int k = 1; k <= 12; ++k) v.push_back("TLAC_" + std::to_string(k));
    return v;
  }();
  return names;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_z_column(const std::string& name) {
  if (name.size() < 2 || name[0] != 'z') return false;
  return std::all_of(name.begin() + 1, name.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string where(std::size_t line, std::size_t col, const std::string& name) {
  return "line " + std::to_string(line) + ", column " + std::to_string(col + 1) + " ('" + name + "')";
}

double parse_number(const std::string& field, std::size_t line, std::size_t col, const std::string& name) {
  if (field.empty() || field == "NA" || field == "NaN" || field == "nan") {
    throw DataError("missing value at " + where(line, col, name));
  }
  double x = 0.0;
  const char* first = field.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, field.data() + field.size(), x);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw DataError("non-numeric value '" + field + "' at " + where(line, col, name));
  }
  if (!std::isfinite(x)) throw DataError("non-finite value at " + where(line, col, name));
  return x;
}

// "# ... format_version=N" comment lines; other comments are ignored.
void check_version_comment(const std::string& line, std::size_t line_no) {
  const auto pos = line.find("format_version=");
  if (pos == std::string::npos) return;
  const std::string value = trim(line.substr(pos + 15));
  int version = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), version);
  if (res.ec != std::errc() || version != kFormatVersion) {
    throw DataError("unsupported format_version '" + value + "' on line " + std::to_string(line_no));
  }
}

struct ParsedTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

ParsedTable parse_table(std::istream& in) {
  ParsedTable t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      check_version_comment(line, line_no);
      continue;
    }
    if (!have_header) {
      t.header = split_fields(line);
      have_header = true;
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() != t.header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw DataError("CSV input has no header row");
  return t;
}

struct ColumnLayout {
  int u = -1, v = -1, delta1 = -1, delta2 = -1;
  std::vector<std::size_t> covariate_cols;
  std::vector<std::string> covariate_names;
};

ColumnLayout classify_columns(const std::vector<std::string>& header, const CsvReadOptions& opts) {
  ColumnLayout lay;
  std::unordered_set<std::string> allowed(known_covariate_columns().begin(), known_covariate_columns().end());
  allowed.insert(opts.allow_columns.begin(), opts.allow_columns.end());
  std::unordered_set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& name = header[c];
    if (!seen.insert(name).second) throw DataError("duplicate column '" + name + "'");
    if (name == "u") lay.u = static_cast<int>(c);
    else if (name == "v") lay.v = static_cast<int>(c);
    else if (name == "delta1") lay.delta1 = static_cast<int>(c);
    else if (name == "delta2") lay.delta2 = static_cast<int>(c);
    else if (is_z_column(name) || allowed.count(name)) {
      lay.covariate_cols.push_back(c);
      lay.covariate_names.push_back(name);
    } else {
      throw DataError("unknown column '" + name + "' (column " + std::to_string(c + 1) +
                      "); pass it as an allowed column to accept it");
    }
  }
  if (lay.covariate_cols.empty()) throw DataError("no covariate columns found");
  return lay;
}

int parse_indicator(const std::string& field, std::size_t line, std::size_t col, const std::string& name) {
  const double x = parse_number(field, line, col, name);
  if (x != 0.0 && x != 1.0) throw DataError("indicator must be 0 or 1 at " + where(line, col, name));
  return static_cast<int>(x);
}

}  // namespace

NamedDataset read_dataset_csv(std::istream& in, const CsvReadOptions& opts) {
  const auto table = parse_table(in);
  const auto lay = classify_columns(table.header, opts);
  for (const auto& [idx, name] : {std::pair{lay.u, "u"}, {lay.v, "v"}, {lay.delta1, "delta1"}, {lay.delta2, "delta2"}}) {
    if (idx < 0) throw DataError(std::string("missing required column '") + name + "'");
  }
  const std::size_t n = table.rows.size();
  if (n == 0) throw DataError("dataset has no rows");
  const auto d = static_cast<Eigen::Index>(lay.covariate_cols.size());

  Dataset::Matrix z(static_cast<Eigen::Index>(n), d);
  std::vector<double> u(n), v(n);
  std::vector<Censoring> kind(n);
  const auto& h = table.header;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const std::size_t ln = table.line_numbers[i];
    const auto cu = static_cast<std::size_t>(lay.u), cv = static_cast<std::size_t>(lay.v);
    const auto c1 = static_cast<std::size_t>(lay.delta1), c2 = static_cast<std::size_t>(lay.delta2);
    u[i] = parse_number(row[cu], ln, cu, h[cu]);
    v[i] = parse_number(row[cv], ln, cv, h[cv]);
    const int d1 = parse_indicator(row[c1], ln, c1, h[c1]);
    const int d2 = parse_indicator(row[c2], ln, c2, h[c2]);
    if (d1 + d2 > 1) throw DataError("line " + std::to_string(ln) + ": delta1 and delta2 are both 1");
    if (u[i] < 0.0) throw DataError("negative u at " + where(ln, cu, h[cu]));
    if (u[i] > v[i]) throw DataError("line " + std::to_string(ln) + ": u exceeds v");
    if (d2 == 1 && !(u[i] < v[i])) throw DataError("line " + std::to_string(ln) + ": interval-censored row needs u < v");
    kind[i] = d1 ? Censoring::Left : d2 ? Censoring::Interval : Censoring::Right;
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto c = lay.covariate_cols[static_cast<std::size_t>(j)];
      z(static_cast<Eigen::Index>(i), j) = parse_number(row[c], ln, c, h[c]);
    }
  }
  return {Dataset(std::move(z), std::move(u), std::move(v), std::move(kind)), lay.covariate_names};
}

NamedDataset read_dataset_csv(const std::string& path, const CsvReadOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  try {
    return read_dataset_csv(in, opts);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

CovariateTable read_covariates_csv(const std::string& path, const CsvReadOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  try {
    const auto table = parse_table(in);
    const auto lay = classify_columns(table.header, opts);
    CovariateTable out;
    out.names = lay.covariate_names;
    const auto d = static_cast<Eigen::Index>(lay.covariate_cols.size());
    out.z.resize(static_cast<Eigen::Index>(table.rows.size()), d);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const auto c = lay.covariate_cols[static_cast<std::size_t>(j)];
        out.z(static_cast<Eigen::Index>(i), j) =
            parse_number(table.rows[i][c], table.line_numbers[i], c, table.header[c]);
      }
    }
    if (out.z.rows() == 0) throw DataError("no covariate rows");
    return out;
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::vector<std::string> default_covariate_names(int d) {
  std::vector<std::string> names;
  for (int j = 1; j <= d; ++j) names.push_back("z" + std::to_string(j));
  return names;
}

void write_dataset_csv(std::ostream& out, const Dataset& data, const std::vector<std::string>& names) {
  if (static_cast<int>(names.size()) != data.dim()) throw DomainError("covariate name count does not match dimension");
  out << "# icnet dataset format_version=" << kFormatVersion << "\n";
  out << "u,v,delta1,delta2";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  const auto& z = data.covariates();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto k = data.kind()[i];
    out << format_double(data.u()[i]) << ',' << format_double(data.v()[i]) << ',' << (k == Censoring::Left ? 1 : 0)
        << ',' << (k == Censoring::Interval ? 1 : 0);
    for (Eigen::Index j = 0; j < z.cols(); ++j) out << ',' << format_double(z(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data, const std::vector<std::string>& names) {
  std::ostringstream ss;
  write_dataset_csv(ss, data, names);
  write_text_file(path, ss.str());
}

namespace {

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = j[r].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw DataError("model file: ragged weight matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

void check_version(const json& j, const char* what) {
  if (!j.contains("format_version") || j["format_version"] != kFormatVersion) {
    throw DataError(std::string(what) + ": missing or unsupported format_version");
  }
}

}  // namespace

std::string model_to_json(const FittedModel& model, const std::vector<std::string>& names) {
  if (static_cast<int>(names.size()) != model.dim()) throw DomainError("covariate name count does not match model");
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "icnet_model";
  j["covariates"] = names;
  j["standardization"] = {{"mean", model.standardization.mean}, {"sd", model.standardization.sd}};
  json layers = json::array();
  for (const auto& l : model.net.layers) layers.push_back({{"weight", matrix_json(l.weight)}, {"bias", vector_json(l.bias)}});
  j["net"] = {{"activation", to_string(model.net.activation)}, {"theta", vector_json(model.net.theta)}, {"layers", layers}};
  j["baseline"] = {{"times", model.baseline.times}, {"values", model.baseline.values}};
  j["hierarchy_M"] = model.hierarchy_M;
  j["penalty_lambda"] = model.penalty_lambda;
  j["final_loglik"] = model.final_loglik;
  std::vector<std::string> selected;
  for (int k : model.selected_features) selected.push_back(names[static_cast<std::size_t>(k)]);
  j["selected_features"] = selected;
  const auto& dg = model.diagnostics;
  j["diagnostics"] = {{"epochs_run", dg.epochs_run},
                      {"outer_iterations", dg.objective.size()},
                      {"objective", dg.objective},
                      {"loglik_before_icm", dg.loglik_before_icm},
                      {"loglik_after_icm", dg.loglik_after_icm},
                      {"max_hierarchy_violation", dg.max_hierarchy_violation},
                      {"max_full_shrinkage_lambda", dg.max_full_shrinkage_lambda},
                      {"boundary", dg.boundary},
                      {"identifiable", dg.identifiable}};
  return j.dump(1) + "\n";
}

ModelFile model_from_json(const std::string& text) {
  ModelFile out;
  try {
    const json j = json::parse(text);
    check_version(j, "model file");
    if (j.value("kind", "") != "icnet_model") throw DataError("model file: not an icnet model");
    out.covariate_names = j.at("covariates").get<std::vector<std::string>>();
    auto& m = out.model;
    m.standardization.mean = j.at("standardization").at("mean").get<std::vector<double>>();
    m.standardization.sd = j.at("standardization").at("sd").get<std::vector<double>>();
    const auto& net = j.at("net");
    Eigen::VectorXd theta = vector_from_json(net.at("theta"));
    std::vector<DenseLayer> layers;
    Eigen::Index in = theta.size();
    for (const auto& l : net.at("layers")) {
      DenseLayer layer{matrix_from_json(l.at("weight"), in), vector_from_json(l.at("bias"))};
      in = layer.weight.rows();
      layers.push_back(std::move(layer));
    }
    m.net = ResidualRiskNet(std::move(theta), std::move(layers), activation_from_string(net.at("activation")));
    m.baseline = StepCumulativeHazard(j.at("baseline").at("times").get<std::vector<double>>(),
                                      j.at("baseline").at("values").get<std::vector<double>>());
    m.hierarchy_M = j.at("hierarchy_M").get<double>();
    m.penalty_lambda = j.at("penalty_lambda").get<double>();
    m.final_loglik = j.at("final_loglik").get<double>();
    if (j.contains("diagnostics")) {
      const auto& dg = j["diagnostics"];
      m.diagnostics.epochs_run = dg.value("epochs_run", 0);
      m.diagnostics.objective = dg.value("objective", std::vector<double>{});
      m.diagnostics.loglik_before_icm = dg.value("loglik_before_icm", std::vector<double>{});
      m.diagnostics.loglik_after_icm = dg.value("loglik_after_icm", std::vector<double>{});
      m.diagnostics.max_hierarchy_violation = dg.value("max_hierarchy_violation", 0.0);
      m.diagnostics.max_full_shrinkage_lambda = dg.value("max_full_shrinkage_lambda", 0.0);
      m.diagnostics.boundary = dg.value("boundary", false);
      m.diagnostics.identifiable = dg.value("identifiable", true);
    }
    m.selected_features = active_features(m.net);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  } catch (const DomainError& e) {
    throw DataError(std::string("model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  const auto& m = out.model;
  if (static_cast<int>(out.covariate_names.size()) != m.dim() || m.standardization.dim() != m.dim() ||
      m.standardization.sd.size() != m.standardization.mean.size()) {
    throw DataError("model file: covariate dimensions disagree");
  }
  if (!(m.hierarchy_M > 0.0)) throw DataError("model file: hierarchy_M must be positive");
  const double viol = hierarchy_violation(m.net.theta, m.net.first_layer(), m.hierarchy_M);
  if (viol > 0.0) {
    throw DataError("model file: hierarchy constraint violated by " + format_double(viol));
  }
  return out;
}

void save_model(const std::string& path, const FittedModel& model, const std::vector<std::string>& names) {
  write_text_file(path, model_to_json(model, names));
}

ModelFile load_model(const std::string& path) {
  try {
    return model_from_json(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_path_csv(std::ostream& out, const PathResult& path) {
  out << "# icnet path format_version=" << kFormatVersion << " t1=" << format_double(path.t1)
      << " t2=" << format_double(path.t2) << "\n";
  out << "step,lambda,n_active,train_loglik,val_ibs,best\n";
  for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
    out << k << ',' << format_double(path.lambdas[k]) << ',' << path.n_active[k] << ','
        << format_double(path.train_loglik[k]) << ',' << format_double(path.val_ibs[k]) << ','
        << (k == path.best_index ? 1 : 0) << '\n';
  }
}

void write_path_csv(const std::string& file, const PathResult& path) {
  std::ostringstream ss;
  write_path_csv(ss, path);
  write_text_file(file, ss.str());
}

void write_survival_csv(std::ostream& out, const std::vector<std::vector<double>>& curves,
                        const std::vector<double>& times) {
  out << "# icnet survival format_version=" << kFormatVersion << "\n";
  out << "id,t,S\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (std::size_t k = 0; k < times.size(); ++k) {
      out << i + 1 << ',' << format_double(times[k]) << ',' << format_double(curves[i][k]) << '\n';
    }
  }
}

std::string truth_to_json(const SimTruth& truth, const SimConfig& cfg) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "icnet_truth";
  j["model"] = to_string(truth.model);
  j["n"] = cfg.n;
  j["d"] = cfg.d;
  j["seed"] = cfg.seed;
  j["baseline"] = {{"gamma", truth.baseline.gamma}, {"lam", truth.baseline.lam}};
  j["inspections"] = {{"count", cfg.inspections.count}, {"tau", truth.tau}};
  std::vector<std::string> support;
  for (int k : truth.support) support.push_back("z" + std::to_string(k + 1));
  j["support"] = support;
  j["risk"] = truth.risk;
  j["event_time"] = truth.event_time;
  return j.dump(1) + "\n";
}

SimTruth truth_from_json(const std::string& text) {
  SimTruth t;
  try {
    const json j = json::parse(text);
    check_version(j, "truth file");
    if (j.value("kind", "") != "icnet_truth") throw DataError("truth file: not a simulation truth sidecar");
    t.model = risk_model_from_string(j.at("model").get<std::string>());
    t.baseline = GompertzBaseline(j.at("baseline").at("gamma").get<double>(), j.at("baseline").at("lam").get<double>());
    t.tau = j.at("inspections").at("tau").get<double>();
    for (const auto& s : j.at("support").get<std::vector<std::string>>()) {
      if (!is_z_column(s)) throw DataError("truth file: bad support entry '" + s + "'");
      t.support.push_back(std::stoi(s.substr(1)) - 1);
    }
    t.risk = j.at("risk").get<std::vector<double>>();
    t.event_time = j.at("event_time").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("truth file: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("truth file: ") + e.what());
  } catch (const DomainError& e) {
    throw DataError(std::string("truth file: ") + e.what());
  }
  return t;
}

void save_truth(const std::string& path, const SimTruth& truth, const SimConfig& cfg) {
  write_text_file(path, truth_to_json(truth, cfg));
}

SimTruth load_truth(const std::string& path) {
  try {
    return truth_from_json(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace icnet
