// icnet command-line tool. Every command records a JSON manifest next to its
// primary output; `icnet rerun <manifest>` replays it and checks the hashes.

#include "icnet/icnet.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

constexpr int kExitInternal = 1;

// Thrown to unwind with a specific exit code.
struct CliFailure {
  int code;
  std::string message;
};

void check(icnet_status s) {
  if (s != ICNET_OK) throw CliFailure{s == ICNET_ERR_INTERNAL ? kExitInternal : static_cast<int>(s), icnet_last_error()};
}

[[noreturn]] void usage_error(const std::string& msg) { throw CliFailure{ICNET_ERR_USAGE, msg}; }

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Dataset = Handle<icnet_dataset, icnet_dataset_free>;
using Truth = Handle<icnet_truth, icnet_truth_free>;
using Model = Handle<icnet_model, icnet_model_free>;
using Path = Handle<icnet_path, icnet_path_free>;
using Benchmark = Handle<icnet_benchmark, icnet_benchmark_free>;

std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliFailure{ICNET_ERR_DATA, "cannot open '" + path + "' for hashing"};
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw CliFailure{kExitInternal, "SHA-256 initialisation failed"};
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[md[k] >> 4];
    out += hex[md[k] & 15];
  }
  return out;
}

// Everything a command needs to write its manifest.
struct RunRecord {
  std::string command;
  std::vector<std::string> args;
  std::uint64_t seed = 0;
  json config = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string manifest_path;
};

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunRecord& rec, double seconds) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "icnet_manifest";
  j["version"] = icnet_version();
  j["command"] = rec.command;
  j["args"] = rec.args;
  j["seed"] = rec.seed;
  j["config"] = rec.config;
  j["inputs"] = json::array();
  for (const auto& p : rec.inputs) j["inputs"].push_back({{"path", p}, {"sha256", sha256_file(p)}});
  j["outputs"] = json::array();
  for (const auto& p : rec.outputs) j["outputs"].push_back({{"path", p}, {"sha256", sha256_file(p)}});
  j["started_at"] = timestamp_utc();
  j["wall_clock_seconds"] = seconds;
  std::ofstream out(rec.manifest_path, std::ios::binary);
  if (!out) throw CliFailure{ICNET_ERR_DATA, "cannot write manifest '" + rec.manifest_path + "'"};
  out << j.dump(2) << "\n";
}

struct FitFlags {
  icnet_fit_config c;
  std::string hidden = "10";
  bool no_standardize = false;

  FitFlags() { icnet_fit_config_default(&c); }

  void add(CLI::App* app) {
    app->add_option("--epochs", c.epochs, "Proximal-gradient epochs per outer iteration")->capture_default_str();
    app->add_option("--outer-iters", c.outer_iters, "Baseline (ICM) updates")->capture_default_str();
    app->add_option("--lr", c.learning_rate, "Initial learning rate")->capture_default_str();
    app->add_option("--M", c.hierarchy_M, "Hierarchy multiplier")->capture_default_str();
    app->add_option("--hidden", hidden, "Comma-separated hidden layer widths")->capture_default_str();
    app->add_option("--init-scale", c.init_scale, "Weight initialisation scale")->capture_default_str();
    app->add_option("--fit-seed", c.seed, "Seed for initialisation and splits")->capture_default_str();
    app->add_flag("--no-standardize", no_standardize, "Fit on raw covariates");
    app->add_option("--icm-tol", c.icm_tol, "ICM relative tolerance")->capture_default_str();
  }

  icnet_fit_config resolve() {
    std::vector<int> widths;
    std::stringstream ss(hidden);
    std::string item;
    while (std::getline(ss, item, ',')) {
      int w = 0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), w);
      if (res.ec != std::errc() || res.ptr != item.data() + item.size() || w < 1) {
        usage_error("--hidden expects positive integers, got '" + hidden + "'");
      }
      widths.push_back(w);
    }
    if (widths.empty() || widths.size() > ICNET_MAX_HIDDEN) usage_error("--hidden needs 1 to 8 layer widths");
    c.n_hidden = static_cast<int>(widths.size());
    for (size_t k = 0; k < widths.size(); ++k) c.hidden_widths[k] = widths[k];
    c.standardize = no_standardize ? 0 : 1;
    return c;
  }

  json to_json() const {
    return {{"epochs", c.epochs},       {"outer_iters", c.outer_iters}, {"learning_rate", c.learning_rate},
            {"hierarchy_M", c.hierarchy_M}, {"penalty_lambda", c.penalty_lambda}, {"hidden", hidden},
            {"init_scale", c.init_scale}, {"fit_seed", c.seed},       {"standardize", c.standardize != 0},
            {"icm_tol", c.icm_tol}};
  }
};

struct PathFlags {
  icnet_path_config c;
  std::string weighting = "paper";

  PathFlags() { icnet_path_config_default(&c); }

  void add(CLI::App* app) {
    app->add_option("--lambda-start", c.lambda_start, "First lambda (<= 0: automatic)")->capture_default_str();
    app->add_option("--lambda-factor", c.lambda_start_factor, "Multiplier on the automatic start")
        ->capture_default_str();
    app->add_option("--multiplier", c.multiplier, "Lambda growth factor per step")->capture_default_str();
    app->add_option("--val-fraction", c.val_fraction, "Validation share of the split")->capture_default_str();
    app->add_option("--max-steps", c.max_path_length, "Maximum path length")->capture_default_str();
    app->add_option("--weighting", weighting, "IBS weighting (paper or uniform)")
        ->check(CLI::IsMember({"paper", "uniform"}))
        ->capture_default_str();
    app->add_option("--ibs-grid", c.ibs_grid_n, "IBS quadrature points")->capture_default_str();
  }

  icnet_path_config resolve() {
    c.weighting = weighting == "uniform" ? ICNET_IBS_UNIFORM : ICNET_IBS_PAPER;
    return c;
  }

  json to_json() const {
    return {{"lambda_start", c.lambda_start}, {"lambda_start_factor", c.lambda_start_factor},
            {"multiplier", c.multiplier},     {"val_fraction", c.val_fraction},
            {"max_path_length", c.max_path_length}, {"weighting", weighting},
            {"ibs_grid_n", c.ibs_grid_n}};
  }
};

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

int model_number(const std::string& m) { return m == "m2" ? 2 : 1; }

// Parses args and runs one command. Returns the exit code.
int run(const std::vector<std::string>& args, bool write_manifests) {
  CLI::App app{"Sparse neural Cox models for interval-censored survival data", "icnet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(icnet_version()));

  RunRecord rec;
  rec.args = args;
  std::string manifest_override;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic interval-censored dataset");
  icnet_sim_config sim_cfg;
  icnet_sim_config_default(&sim_cfg);
  std::string sim_model = "m1", sim_out, sim_truth;
  sim->add_option("--model", sim_model, "True risk function")->check(CLI::IsMember({"m1", "m2"}))->capture_default_str();
  sim->add_option("--n", sim_cfg.n, "Sample size")->capture_default_str();
  sim->add_option("--d", sim_cfg.d, "Covariate dimension")->capture_default_str();
  sim->add_option("--seed", sim_cfg.seed, "Random seed")->capture_default_str();
  sim->add_option("--inspections", sim_cfg.inspections, "Inspection times per subject")->capture_default_str();
  sim->add_option("--tau", sim_cfg.tau, "Inspection horizon (<= 0: automatic)")->capture_default_str();
  sim->add_option("--gamma", sim_cfg.gompertz_gamma, "Gompertz shape")->capture_default_str();
  sim->add_option("--lam", sim_cfg.gompertz_lam, "Gompertz scale")->capture_default_str();
  sim->add_option("--out", sim_out, "Dataset CSV")->required();
  sim->add_option("--truth", sim_truth, "Truth JSON (default: <out>.truth.json)");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit one model at a fixed penalty");
  FitFlags fit_flags;
  std::string fit_data, fit_out;
  std::vector<std::string> fit_allow;
  fit->add_option("--data", fit_data, "Training CSV")->required();
  fit->add_option("--out", fit_out, "Model JSON")->required();
  fit->add_option("--lambda", fit_flags.c.penalty_lambda, "Lasso penalty")->capture_default_str();
  fit->add_option("--allow-column", fit_allow, "Extra covariate column to accept");
  fit_flags.add(fit);

  // path
  auto* path = app.add_subcommand("path", "Warm-started regularisation path with IBS model selection");
  FitFlags path_fit;
  PathFlags path_flags;
  std::string path_data, path_model_out, path_csv_out;
  std::vector<std::string> path_allow;
  path->add_option("--data", path_data, "Input CSV")->required();
  path->add_option("--out-model", path_model_out, "Selected model JSON")->required();
  path->add_option("--out-path", path_csv_out, "Path CSV")->required();
  path->add_option("--allow-column", path_allow, "Extra covariate column to accept");
  path_fit.add(path);
  path_flags.add(path);

  // predict
  auto* pred = app.add_subcommand("predict", "Survival curves for covariate rows");
  std::string pred_model, pred_cov, pred_out;
  std::vector<double> pred_times;
  double grid_from = 0.0, grid_to = 0.0;
  int grid_n = 0;
  std::vector<std::string> pred_allow;
  pred->add_option("--model", pred_model, "Model JSON")->required();
  pred->add_option("--covariates", pred_cov, "Covariate CSV")->required();
  pred->add_option("--out", pred_out, "Survival CSV")->required();
  pred->add_option("--times", pred_times, "Comma-separated prediction times")->delimiter(',');
  pred->add_option("--grid-from", grid_from, "Equally spaced grid start");
  pred->add_option("--grid-to", grid_to, "Equally spaced grid end");
  pred->add_option("--grid-n", grid_n, "Equally spaced grid size");
  pred->add_option("--allow-column", pred_allow, "Extra covariate column to accept");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Integrated Brier score and, with a truth file, recovery metrics");
  std::string eval_model, eval_data, eval_cens, eval_truth, eval_out, eval_weighting = "paper";
  std::vector<std::string> eval_allow;
  icnet_eval_config eval_cfg;
  icnet_eval_config_default(&eval_cfg);
  eval->add_option("--model", eval_model, "Model JSON")->required();
  eval->add_option("--data", eval_data, "Evaluation CSV")->required();
  eval->add_option("--censoring-data", eval_cens, "CSV for the censoring distribution (default: --data)");
  eval->add_option("--truth", eval_truth, "Simulation truth JSON");
  eval->add_option("--out", eval_out, "Metrics CSV")->required();
  eval->add_option("--t1", eval_cfg.t1, "IBS lower limit");
  eval->add_option("--t2", eval_cfg.t2, "IBS upper limit");
  eval->add_option("--weighting", eval_weighting, "IBS weighting (paper or uniform)")
      ->check(CLI::IsMember({"paper", "uniform"}));
  eval->add_option("--ibs-grid", eval_cfg.grid_n, "IBS quadrature points")->capture_default_str();
  eval->add_option("--allow-column", eval_allow, "Extra covariate column to accept");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Replicated simulation study");
  FitFlags bench_fit;
  PathFlags bench_path;
  icnet_benchmark_config bench_cfg;
  icnet_benchmark_config_default(&bench_cfg);
  std::string bench_model = "m1", bench_out;
  std::vector<size_t> bench_n{500};
  bool quiet = false;
  bench->add_option("--model", bench_model, "True risk function")->check(CLI::IsMember({"m1", "m2"}))
      ->capture_default_str();
  bench->add_option("--n", bench_n, "Comma-separated sample sizes")->delimiter(',')->capture_default_str();
  bench->add_option("--replicates", bench_cfg.replicates, "Replicates per sample size")->capture_default_str();
  bench->add_option("--seed", bench_cfg.seed, "Base seed")->capture_default_str();
  bench->add_option("--d", bench_cfg.d, "Covariate dimension")->capture_default_str();
  bench->add_option("--threads", bench_cfg.threads, "Worker threads (default: ICNET_THREADS or all cores)");
  bench->add_option("--out", bench_out, "Results CSV")->required();
  bench->add_flag("--quiet", quiet, "No per-replicate progress");
  bench_fit.add(bench);
  bench_path.add(bench);

  // rerun
  auto* rerun = app.add_subcommand("rerun", "Replay a manifest and verify output hashes");
  std::string rerun_manifest;
  rerun->add_option("manifest", rerun_manifest, "Manifest JSON")->required();

  for (auto* sub : {sim, fit, path, pred, eval, bench}) {
    sub->add_option("--manifest", manifest_override, "Manifest path (default: <output>.manifest.json)");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ICNET_ERR_USAGE;
  }

  const auto start = std::chrono::steady_clock::now();
  auto finish = [&](const std::string& primary) {
    if (!write_manifests) return;
    rec.manifest_path = manifest_override.empty() ? primary + ".manifest.json" : manifest_override;
    write_manifest(rec, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  };

  if (*sim) {
    rec.command = "simulate";
    sim_cfg.model = model_number(sim_model);
    if (sim_truth.empty()) sim_truth = sim_out + ".truth.json";
    Dataset data;
    Truth truth;
    check(icnet_simulate(&sim_cfg, data.out(), truth.out()));
    check(icnet_dataset_write_csv(data.get(), sim_out.c_str()));
    check(icnet_truth_write_json(truth.get(), sim_truth.c_str()));
    rec.seed = sim_cfg.seed;
    rec.config = {{"model", sim_model},           {"n", sim_cfg.n},
                  {"d", sim_cfg.d},               {"inspections", sim_cfg.inspections},
                  {"tau", sim_cfg.tau},           {"gamma", sim_cfg.gompertz_gamma},
                  {"lam", sim_cfg.gompertz_lam}};
    rec.outputs = {sim_out, sim_truth};
    std::cout << "wrote " << sim_out << " (" << icnet_dataset_size(data.get()) << " rows) and " << sim_truth << "\n";
    finish(sim_out);
  } else if (*fit) {
    rec.command = "fit";
    const auto cfg = fit_flags.resolve();
    const auto allow = c_strings(fit_allow);
    Dataset data;
    Model model;
    check(icnet_dataset_read_csv(fit_data.c_str(), allow.data(), allow.size(), data.out()));
    check(icnet_fit(data.get(), &cfg, model.out()));
    check(icnet_model_save(model.get(), fit_out.c_str()));
    rec.seed = cfg.seed;
    rec.config = fit_flags.to_json();
    rec.inputs = {fit_data};
    rec.outputs = {fit_out};
    std::cout << "wrote " << fit_out << " (" << icnet_model_n_selected(model.get()) << " of "
              << icnet_model_dim(model.get()) << " features selected)\n";
    finish(fit_out);
  } else if (*path) {
    rec.command = "path";
    const auto fcfg = path_fit.resolve();
    const auto pcfg = path_flags.resolve();
    const auto allow = c_strings(path_allow);
    Dataset data;
    Path res;
    Model best;
    check(icnet_dataset_read_csv(path_data.c_str(), allow.data(), allow.size(), data.out()));
    check(icnet_fit_path(data.get(), &fcfg, &pcfg, res.out()));
    check(icnet_path_write_csv(res.get(), path_csv_out.c_str()));
    const size_t k = icnet_path_best_index(res.get());
    check(icnet_path_model(res.get(), k, best.out()));
    check(icnet_model_save(best.get(), path_model_out.c_str()));
    double lambda = 0.0, ibs = 0.0;
    int active = 0;
    check(icnet_path_entry(res.get(), k, &lambda, &active, nullptr, &ibs));
    rec.seed = fcfg.seed;
    rec.config = path_fit.to_json();
    rec.config.update(path_flags.to_json());
    rec.inputs = {path_data};
    rec.outputs = {path_csv_out, path_model_out};
    std::cout << "path of " << icnet_path_length(res.get()) << " steps; selected lambda=" << fmt(lambda) << " with "
              << active << " features, validation IBS " << fmt(ibs) << "\n";
    finish(path_model_out);
  } else if (*pred) {
    rec.command = "predict";
    std::vector<double> times = pred_times;
    if (grid_n > 0) {
      if (!times.empty()) usage_error("use either --times or the --grid-* options");
      if (grid_n < 2 || !(grid_to > grid_from) || grid_from < 0.0) {
        usage_error("--grid-n must be >= 2 and 0 <= --grid-from < --grid-to");
      }
      for (int k = 0; k < grid_n; ++k) times.push_back(grid_from + (grid_to - grid_from) * k / (grid_n - 1));
    }
    if (times.empty()) usage_error("an empty time grid was given; pass --times or --grid-from/--grid-to/--grid-n");
    for (size_t k = 0; k < times.size(); ++k) {
      if (!(times[k] >= 0.0) || (k > 0 && !(times[k] > times[k - 1]))) {
        usage_error("prediction times must be nonnegative and strictly increasing");
      }
    }
    const auto allow = c_strings(pred_allow);
    Model model;
    check(icnet_model_load(pred_model.c_str(), model.out()));
    check(icnet_predict_csv(model.get(), pred_cov.c_str(), allow.data(), allow.size(), times.data(), times.size(),
                            pred_out.c_str()));
    json jt = json::array();
    for (double t : times) jt.push_back(t);
    rec.config = {{"times", jt}};
    rec.inputs = {pred_model, pred_cov};
    rec.outputs = {pred_out};
    std::cout << "wrote " << pred_out << "\n";
    finish(pred_out);
  } else if (*eval) {
    rec.command = "evaluate";
    eval_cfg.weighting = eval_weighting == "uniform" ? ICNET_IBS_UNIFORM : ICNET_IBS_PAPER;
    const auto allow = c_strings(eval_allow);
    Model model;
    Dataset data, cens;
    Truth truth;
    check(icnet_model_load(eval_model.c_str(), model.out()));
    check(icnet_dataset_read_csv(eval_data.c_str(), allow.data(), allow.size(), data.out()));
    rec.inputs = {eval_model, eval_data};
    if (!eval_cens.empty()) {
      check(icnet_dataset_read_csv(eval_cens.c_str(), allow.data(), allow.size(), cens.out()));
      rec.inputs.push_back(eval_cens);
    }
    if (!eval_truth.empty()) {
      check(icnet_truth_read_json(eval_truth.c_str(), truth.out()));
      rec.inputs.push_back(eval_truth);
    }
    icnet_metrics m{};
    check(icnet_evaluate(model.get(), data.get(), cens.get(), truth.get(), &eval_cfg, &m));
    std::ostringstream ss;
    ss << "# icnet metrics format_version=1\nmetric,value\n";
    ss << "ibs," << fmt(m.ibs) << "\nt1," << fmt(m.t1) << "\nt2," << fmt(m.t2) << "\ndropped," << m.dropped << "\n";
    if (truth.get()) {
      ss << "r2," << fmt(m.r2) << "\nl2," << fmt(m.l2) << "\ntp," << fmt(m.tp) << "\ntn," << fmt(m.tn) << "\n";
    }
    std::ofstream out(eval_out, std::ios::binary);
    if (!out || !(out << ss.str())) throw CliFailure{ICNET_ERR_DATA, "cannot write '" + eval_out + "'"};
    out.close();
    rec.config = {{"t1", eval_cfg.t1}, {"t2", eval_cfg.t2}, {"weighting", eval_weighting}, {"ibs_grid_n", eval_cfg.grid_n}};
    rec.outputs = {eval_out};
    std::cout << ss.str().substr(ss.str().find("metric,value\n") + 13);
    finish(eval_out);
  } else if (*bench) {
    rec.command = "benchmark";
    const auto fcfg = bench_fit.resolve();
    const auto pcfg = bench_path.resolve();
    bench_cfg.model = model_number(bench_model);
    bench_cfg.n_values = bench_n.data();
    bench_cfg.n_count = bench_n.size();
    if (!quiet) {
      bench_cfg.progress = [](const icnet_replicate* r, void*) {
        std::fprintf(stderr, "n=%zu replicate %d: ibs=%.4f l2=%.4g r2=%.3f tp=%.2f tn=%.2f (%.1fs)\n", r->n,
                     r->replicate, r->ibs, r->l2, r->r2, r->tp, r->tn, r->seconds);
      };
    }
    Benchmark b;
    check(icnet_benchmark_run(&bench_cfg, &fcfg, &pcfg, b.out()));
    check(icnet_benchmark_write_csv(b.get(), bench_out.c_str()));
    for (size_t n : bench_n) {
      std::cout << "n=" << n;
      for (const char* metric : {"ibs", "l2", "r2", "tp", "tn"}) {
        double mean = 0.0, sd = 0.0;
        check(icnet_benchmark_summary(b.get(), n, metric, &mean, &sd));
        std::cout << "  " << metric << " " << fmt(std::round(mean * 1e4) / 1e4) << " (sd " << fmt(std::round(sd * 1e4) / 1e4)
                  << ")";
      }
      std::cout << "\n";
    }
    rec.seed = bench_cfg.seed;
    rec.config = bench_fit.to_json();
    rec.config.update(bench_path.to_json());
    rec.config["model"] = bench_model;
    rec.config["n"] = bench_n;
    rec.config["replicates"] = bench_cfg.replicates;
    rec.config["d"] = bench_cfg.d;
    rec.outputs = {bench_out};
    finish(bench_out);
  } else if (*rerun) {
    json man;
    try {
      std::ifstream in(rerun_manifest, std::ios::binary);
      if (!in) throw CliFailure{ICNET_ERR_DATA, "cannot open manifest '" + rerun_manifest + "'"};
      man = json::parse(in);
      if (man.value("kind", "") != "icnet_manifest" || man.value("format_version", 0) != 1) {
        throw CliFailure{ICNET_ERR_DATA, "'" + rerun_manifest + "' is not an icnet manifest"};
      }
    } catch (const json::exception& e) {
      throw CliFailure{ICNET_ERR_DATA, std::string("manifest: ") + e.what()};
    }
    for (const auto& item : man.at("inputs")) {
      const auto p = item.at("path").get<std::string>();
      if (sha256_file(p) != item.at("sha256").get<std::string>()) {
        throw CliFailure{ICNET_ERR_DATA, "input '" + p + "' changed since the recorded run"};
      }
    }
    const auto recorded = man.at("args").get<std::vector<std::string>>();
    const int code = run(recorded, false);
    if (code != 0) return code;
    bool identical = true;
    for (const auto& item : man.at("outputs")) {
      const auto p = item.at("path").get<std::string>();
      const bool same = sha256_file(p) == item.at("sha256").get<std::string>();
      std::cout << (same ? "identical  " : "DIFFERENT  ") << p << "\n";
      identical = identical && same;
    }
    if (!identical) throw CliFailure{ICNET_ERR_NUMERICAL, "re-run outputs differ from the manifest"};
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(args, true);
  } catch (const CliFailure& f) {
    std::cerr << "icnet: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "icnet: " << e.what() << "\n";
    return kExitInternal;
  }
}
