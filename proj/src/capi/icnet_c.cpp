#include "icnet/icnet.h"

#include "icnet/benchmark.hpp"
#include "icnet/errors.hpp"
#include "icnet/hierprox.hpp"
#include "icnet/io.hpp"
#include "icnet/metrics.hpp"
#include "icnet/simgen.hpp"
#include "icnet/trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <new>
#include <sstream>
#include <string>

struct icnet_dataset {
  icnet::Dataset data;
  std::vector<std::string> names;
};

struct icnet_truth {
  icnet::SimTruth truth;
  icnet::SimConfig cfg;
};

struct icnet_model {
  icnet::FittedModel model;
  std::vector<std::string> names;
};

struct icnet_path {
  icnet::PathResult result;
  std::vector<std::string> names;
};

struct icnet_benchmark {
  icnet::BenchmarkConfig cfg;
  std::vector<icnet::ReplicateResult> results;
};

namespace {

thread_local std::string g_last_error;

icnet_status fail(icnet_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Maps library exceptions onto status codes.
template <class F>
icnet_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return ICNET_OK;
  } catch (const icnet::ConfigError& e) {
    return fail(ICNET_ERR_USAGE, e.what());
  } catch (const icnet::DataError& e) {
    return fail(ICNET_ERR_DATA, e.what());
  } catch (const icnet::DomainError& e) {
    return fail(ICNET_ERR_DATA, e.what());
  } catch (const icnet::NumericalError& e) {
    return fail(ICNET_ERR_NUMERICAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ICNET_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ICNET_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* msg) {
  if (!ok) throw icnet::ConfigError(msg);
}

icnet::RiskModel risk_model(int m) {
  if (m == 1) return icnet::RiskModel::M1;
  if (m == 2) return icnet::RiskModel::M2;
  throw icnet::ConfigError("risk model must be 1 or 2");
}

icnet::IbsWeighting weighting(icnet_ibs_weighting w) {
  if (w == ICNET_IBS_PAPER) return icnet::IbsWeighting::Paper;
  if (w == ICNET_IBS_UNIFORM) return icnet::IbsWeighting::Uniform;
  throw icnet::ConfigError("unknown IBS weighting");
}

icnet::FitConfig to_fit_config(const icnet_fit_config& c) {
  icnet::FitConfig f;
  f.epochs = c.epochs;
  f.outer_iters = c.outer_iters;
  f.learning_rate = c.learning_rate;
  f.hierarchy_M = c.hierarchy_M;
  f.penalty_lambda = c.penalty_lambda;
  require(c.n_hidden >= 1 && c.n_hidden <= ICNET_MAX_HIDDEN, "n_hidden must lie in [1, ICNET_MAX_HIDDEN]");
  f.net.hidden_widths.assign(c.hidden_widths, c.hidden_widths + c.n_hidden);
  f.net.init_scale = c.init_scale;
  require(c.init_scale > 0.0 && std::isfinite(c.init_scale), "init_scale must be positive");
  f.seed = c.seed;
  f.standardize = c.standardize != 0;
  f.objective_tol = c.objective_tol;
  require(c.icm_tol > 0.0, "icm_tol must be positive");
  require(c.icm_max_iter >= 1, "icm_max_iter must be >= 1");
  f.icm.tol = c.icm_tol;
  f.icm.max_iter = c.icm_max_iter;
  f.validate();
  return f;
}

icnet::PathConfig to_path_config(const icnet_path_config& c) {
  icnet::PathConfig p;
  p.lambda_start = c.lambda_start;
  p.lambda_start_factor = c.lambda_start_factor;
  p.multiplier = c.multiplier;
  p.val_fraction = c.val_fraction;
  p.max_path_length = c.max_path_length;
  p.dense_active_fraction = c.dense_active_fraction;
  p.bisection_steps = c.bisection_steps;
  p.weighting = weighting(c.weighting);
  p.ibs_grid_n = c.ibs_grid_n;
  p.validate();
  return p;
}

icnet_replicate to_c(const icnet::ReplicateResult& r) {
  icnet_replicate o{};
  o.n = r.n;
  o.replicate = r.replicate;
  o.seed = r.seed;
  o.lambda = r.lambda;
  o.n_active = r.n_active;
  o.ibs = r.ibs;
  o.l2 = r.l2;
  o.r2 = r.r2;
  o.tp = r.tp;
  o.tn = r.tn;
  o.seconds = r.seconds;
  return o;
}

}  // namespace

extern "C" {

const char* icnet_version(void) { return ICNET_VERSION_STRING; }

const char* icnet_last_error(void) { return g_last_error.c_str(); }

icnet_status icnet_dataset_read_csv(const char* path, const char* const* extra_columns, size_t n_extra,
                                    icnet_dataset** out) {
  return guarded([&] {
    require(path && out, "null argument");
    require(n_extra == 0 || extra_columns, "null extra column list");
    icnet::CsvReadOptions opts;
    for (size_t k = 0; k < n_extra; ++k) opts.allow_columns.emplace_back(extra_columns[k]);
    auto nd = icnet::read_dataset_csv(std::string(path), opts);
    *out = new icnet_dataset{std::move(nd.data), std::move(nd.covariate_names)};
  });
}

icnet_status icnet_dataset_write_csv(const icnet_dataset* data, const char* path) {
  return guarded([&] {
    require(data && path, "null argument");
    icnet::write_dataset_csv(std::string(path), data->data, data->names);
  });
}

icnet_status icnet_dataset_from_arrays(size_t n, size_t d, const double* z, const double* u, const double* v,
                                       const int* delta1, const int* delta2, icnet_dataset** out) {
  return guarded([&] {
    require(z && u && v && delta1 && delta2 && out, "null argument");
    require(n >= 1 && d >= 1, "n and d must be positive");
    icnet::Dataset::Matrix zm =
        Eigen::Map<const icnet::Dataset::Matrix>(z, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<icnet::Censoring> kind(n);
    for (size_t i = 0; i < n; ++i) {
      if ((delta1[i] != 0 && delta1[i] != 1) || (delta2[i] != 0 && delta2[i] != 1) || delta1[i] + delta2[i] > 1) {
        throw icnet::DataError("invalid censoring indicators at row " + std::to_string(i));
      }
      kind[i] = delta1[i] ? icnet::Censoring::Left : delta2[i] ? icnet::Censoring::Interval : icnet::Censoring::Right;
    }
    icnet::Dataset ds(std::move(zm), std::vector<double>(u, u + n), std::vector<double>(v, v + n), std::move(kind));
    *out = new icnet_dataset{std::move(ds), icnet::default_covariate_names(static_cast<int>(d))};
  });
}

size_t icnet_dataset_size(const icnet_dataset* data) { return data ? data->data.size() : 0; }

size_t icnet_dataset_dim(const icnet_dataset* data) { return data ? static_cast<size_t>(data->data.dim()) : 0; }

void icnet_dataset_free(icnet_dataset* data) { delete data; }

void icnet_sim_config_default(icnet_sim_config* cfg) {
  if (!cfg) return;
  const icnet::SimConfig d;
  cfg->n = d.n;
  cfg->d = d.d;
  cfg->model = 1;
  cfg->gompertz_gamma = d.baseline.gamma;
  cfg->gompertz_lam = d.baseline.lam;
  cfg->inspections = d.inspections.count;
  cfg->tau = d.inspections.tau;
  cfg->seed = d.seed;
}

icnet_status icnet_simulate(const icnet_sim_config* cfg, icnet_dataset** data, icnet_truth** truth) {
  return guarded([&] {
    require(cfg && data, "null argument");
    icnet::SimConfig sc;
    sc.n = cfg->n;
    sc.d = cfg->d;
    sc.model = risk_model(cfg->model);
    if (!(cfg->gompertz_gamma > 0.0) || !(cfg->gompertz_lam > 0.0)) {
      throw icnet::ConfigError("Gompertz parameters must be positive");
    }
    sc.baseline = icnet::GompertzBaseline(cfg->gompertz_gamma, cfg->gompertz_lam);
    sc.inspections.count = cfg->inspections;
    sc.inspections.tau = cfg->tau;
    sc.seed = cfg->seed;
    auto study = icnet::simulate_study(sc);
    auto names = icnet::default_covariate_names(sc.d);
    auto* ds = new icnet_dataset{std::move(study.data), std::move(names)};
    if (truth) {
      try {
        *truth = new icnet_truth{std::move(study.truth), sc};
      } catch (...) {
        delete ds;
        throw;
      }
    }
    *data = ds;
  });
}

icnet_status icnet_truth_write_json(const icnet_truth* truth, const char* path) {
  return guarded([&] {
    require(truth && path, "null argument");
    icnet::save_truth(path, truth->truth, truth->cfg);
  });
}

icnet_status icnet_truth_read_json(const char* path, icnet_truth** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto t = icnet::load_truth(path);
    icnet::SimConfig sc;
    sc.n = t.risk.size();
    sc.model = t.model;
    sc.baseline = t.baseline;
    sc.inspections.tau = t.tau;
    *out = new icnet_truth{std::move(t), sc};
  });
}

size_t icnet_truth_size(const icnet_truth* truth) { return truth ? truth->truth.risk.size() : 0; }

icnet_status icnet_truth_risk(const icnet_truth* truth, double* out) {
  return guarded([&] {
    require(truth && out, "null argument");
    std::copy(truth->truth.risk.begin(), truth->truth.risk.end(), out);
  });
}

void icnet_truth_free(icnet_truth* truth) { delete truth; }

void icnet_fit_config_default(icnet_fit_config* cfg) {
  if (!cfg) return;
  const icnet::FitConfig d;
  *cfg = icnet_fit_config{};
  cfg->epochs = d.epochs;
  cfg->outer_iters = d.outer_iters;
  cfg->learning_rate = d.learning_rate;
  cfg->hierarchy_M = d.hierarchy_M;
  cfg->penalty_lambda = d.penalty_lambda;
  cfg->n_hidden = static_cast<int>(d.net.hidden_widths.size());
  for (int k = 0; k < cfg->n_hidden; ++k) cfg->hidden_widths[k] = d.net.hidden_widths[static_cast<size_t>(k)];
  cfg->init_scale = d.net.init_scale;
  cfg->seed = d.seed;
  cfg->standardize = d.standardize ? 1 : 0;
  cfg->objective_tol = d.objective_tol;
  cfg->icm_tol = d.icm.tol;
  cfg->icm_max_iter = d.icm.max_iter;
}

icnet_status icnet_fit(const icnet_dataset* data, const icnet_fit_config* cfg, icnet_model** out) {
  return guarded([&] {
    require(data && cfg && out, "null argument");
    auto model = icnet::fit(data->data, to_fit_config(*cfg));
    *out = new icnet_model{std::move(model), data->names};
  });
}

icnet_status icnet_model_save(const icnet_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "null argument");
    icnet::save_model(path, model->model, model->names);
  });
}

icnet_status icnet_model_load(const char* path, icnet_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto mf = icnet::load_model(path);
    *out = new icnet_model{std::move(mf.model), std::move(mf.covariate_names)};
  });
}

size_t icnet_model_dim(const icnet_model* model) { return model ? static_cast<size_t>(model->model.dim()) : 0; }

size_t icnet_model_n_selected(const icnet_model* model) { return model ? model->model.selected_features.size() : 0; }

icnet_status icnet_model_selected(const icnet_model* model, int* out) {
  return guarded([&] {
    require(model, "null argument");
    require(out || model->model.selected_features.empty(), "null argument");
    std::copy(model->model.selected_features.begin(), model->model.selected_features.end(), out);
  });
}

double icnet_model_hierarchy_violation(const icnet_model* model) {
  if (!model) return std::numeric_limits<double>::quiet_NaN();
  const auto& net = model->model.net;
  return icnet::hierarchy_violation(net.theta, net.first_layer(), model->model.hierarchy_M);
}

icnet_status icnet_model_predict_risk(const icnet_model* model, const double* z, size_t n, double* out) {
  return guarded([&] {
    require(model && z && out, "null argument");
    const auto d = static_cast<size_t>(model->model.dim());
    for (size_t i = 0; i < n; ++i) out[i] = icnet::predict_risk(model->model, {z + i * d, d});
  });
}

icnet_status icnet_model_predict_survival(const icnet_model* model, const double* z, size_t n, const double* times,
                                          size_t n_times, double* out) {
  return guarded([&] {
    require(model && z && out && times, "null argument");
    require(n_times >= 1, "at least one prediction time is required");
    const auto d = static_cast<size_t>(model->model.dim());
    for (size_t i = 0; i < n; ++i) {
      const auto s = icnet::predict_survival(model->model, {z + i * d, d}, {times, n_times});
      std::copy(s.begin(), s.end(), out + i * n_times);
    }
  });
}

icnet_status icnet_predict_csv(const icnet_model* model, const char* covariates_csv, const char* const* extra_columns,
                               size_t n_extra, const double* times, size_t n_times, const char* out_path) {
  return guarded([&] {
    require(model && covariates_csv && out_path, "null argument");
    require(n_extra == 0 || extra_columns, "null extra column list");
    require(n_times >= 1 && times, "at least one prediction time is required");
    icnet::CsvReadOptions opts;
    for (size_t k = 0; k < n_extra; ++k) opts.allow_columns.emplace_back(extra_columns[k]);
    const auto table = icnet::read_covariates_csv(covariates_csv, opts);
    const auto& m = model->model;
    if (table.z.cols() != m.dim()) {
      throw icnet::DataError("covariate file has " + std::to_string(table.z.cols()) + " covariates, model expects " +
                             std::to_string(m.dim()));
    }
    if (table.names != model->names) throw icnet::DataError("covariate columns do not match the model's");
    const std::vector<double> grid(times, times + n_times);
    std::vector<std::vector<double>> curves;
    for (Eigen::Index i = 0; i < table.z.rows(); ++i) {
      const auto row = table.z.row(i);
      curves.push_back(icnet::predict_survival(m, {row.data(), static_cast<size_t>(row.size())}, grid));
    }
    std::ostringstream ss;
    icnet::write_survival_csv(ss, curves, grid);
    icnet::write_text_file(out_path, ss.str());
  });
}

void icnet_model_free(icnet_model* model) { delete model; }

void icnet_path_config_default(icnet_path_config* cfg) {
  if (!cfg) return;
  const icnet::PathConfig d;
  cfg->lambda_start = d.lambda_start;
  cfg->lambda_start_factor = d.lambda_start_factor;
  cfg->multiplier = d.multiplier;
  cfg->val_fraction = d.val_fraction;
  cfg->max_path_length = d.max_path_length;
  cfg->dense_active_fraction = d.dense_active_fraction;
  cfg->bisection_steps = d.bisection_steps;
  cfg->weighting = d.weighting == icnet::IbsWeighting::Paper ? ICNET_IBS_PAPER : ICNET_IBS_UNIFORM;
  cfg->ibs_grid_n = d.ibs_grid_n;
}

icnet_status icnet_fit_path(const icnet_dataset* data, const icnet_fit_config* fit, const icnet_path_config* path,
                            icnet_path** out) {
  return guarded([&] {
    require(data && fit && path && out, "null argument");
    auto res = icnet::fit_path(data->data, to_fit_config(*fit), to_path_config(*path));
    *out = new icnet_path{std::move(res), data->names};
  });
}

size_t icnet_path_length(const icnet_path* path) { return path ? path->result.lambdas.size() : 0; }

size_t icnet_path_best_index(const icnet_path* path) { return path ? path->result.best_index : 0; }

icnet_status icnet_path_entry(const icnet_path* path, size_t k, double* lambda, int* n_active, double* train_loglik,
                              double* val_ibs) {
  return guarded([&] {
    require(path, "null argument");
    const auto& r = path->result;
    require(k < r.lambdas.size(), "path index out of range");
    if (lambda) *lambda = r.lambdas[k];
    if (n_active) *n_active = r.n_active[k];
    if (train_loglik) *train_loglik = r.train_loglik[k];
    if (val_ibs) *val_ibs = r.val_ibs[k];
  });
}

icnet_status icnet_path_limits(const icnet_path* path, double* t1, double* t2) {
  return guarded([&] {
    require(path && t1 && t2, "null argument");
    *t1 = path->result.t1;
    *t2 = path->result.t2;
  });
}

icnet_status icnet_path_model(const icnet_path* path, size_t k, icnet_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    require(k < path->result.models.size(), "path index out of range");
    *out = new icnet_model{path->result.models[k], path->names};
  });
}

icnet_status icnet_path_write_csv(const icnet_path* path, const char* file) {
  return guarded([&] {
    require(path && file, "null argument");
    icnet::write_path_csv(std::string(file), path->result);
  });
}

void icnet_path_free(icnet_path* path) { delete path; }

void icnet_eval_config_default(icnet_eval_config* cfg) {
  if (!cfg) return;
  cfg->t1 = 0.0;
  cfg->t2 = 0.0;
  cfg->weighting = ICNET_IBS_PAPER;
  cfg->grid_n = 100;
  cfg->l2_grid_n = 200;
}

icnet_status icnet_evaluate(const icnet_model* model, const icnet_dataset* data, const icnet_dataset* censoring_data,
                            const icnet_truth* truth, const icnet_eval_config* cfg, icnet_metrics* out) {
  return guarded([&] {
    require(model && data && cfg && out, "null argument");
    require(cfg->grid_n >= 2 && cfg->l2_grid_n >= 2, "evaluation grids need at least two points");
    const auto& m = model->model;
    if (data->data.dim() != m.dim()) throw icnet::DataError("evaluation data dimension does not match the model");
    icnet::BrierConfig bc;
    if (cfg->t1 < cfg->t2) {
      require(cfg->t1 >= 0.0, "t1 must be nonnegative");
      bc.t1 = cfg->t1;
      bc.t2 = cfg->t2;
    } else {
      std::tie(bc.t1, bc.t2) = icnet::default_brier_limits(data->data);
    }
    bc.weighting = weighting(cfg->weighting);
    bc.grid_n = cfg->grid_n;
    const auto& cens = censoring_data ? censoring_data->data : data->data;
    const auto g = icnet::km_censoring(icnet::surrogate_pairs(cens));
    const auto ev = icnet::evaluate_ibs(m, data->data, g, bc);

    icnet_metrics r{};
    r.ibs = ev.value;
    r.t1 = bc.t1;
    r.t2 = bc.t2;
    r.dropped = ev.dropped;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.r2 = r.l2 = r.tp = r.tn = nan;
    if (truth) {
      const auto& t = truth->truth;
      if (t.risk.size() != data->data.size()) {
        throw icnet::DataError("truth sidecar and evaluation data have different sample counts");
      }
      const Eigen::VectorXd pred = m.net.forward(m.standardization.apply(data->data).covariates());
      r.r2 = icnet::r2_risk_or_nan({pred.data(), static_cast<size_t>(pred.size())}, t.risk);
      const std::vector<double> origin(static_cast<size_t>(m.dim()), 0.0);
      r.l2 = icnet::l2_hazard_error(icnet::predict_cumhaz(m, origin), t.baseline, bc.t1, bc.t2, cfg->l2_grid_n);
      const auto rates = icnet::selection_tp_tn(m.selected_features, t.support, m.dim());
      r.tp = rates.tp;
      r.tn = rates.tn;
    }
    *out = r;
  });
}

void icnet_benchmark_config_default(icnet_benchmark_config* cfg) {
  if (!cfg) return;
  *cfg = icnet_benchmark_config{};
  cfg->model = 1;
  cfg->replicates = 30;
  cfg->seed = 1;
  cfg->d = 100;
  cfg->threads = 0;
}

icnet_status icnet_benchmark_run(const icnet_benchmark_config* cfg, const icnet_fit_config* fit,
                                 const icnet_path_config* path, icnet_benchmark** out) {
  return guarded([&] {
    require(cfg && fit && path && out, "null argument");
    require(cfg->n_count == 0 || cfg->n_values, "null sample size list");
    icnet::BenchmarkConfig bc;
    bc.model = risk_model(cfg->model);
    if (cfg->n_count > 0) bc.n_values.assign(cfg->n_values, cfg->n_values + cfg->n_count);
    bc.replicates = cfg->replicates;
    bc.seed = cfg->seed;
    bc.d = cfg->d;
    bc.threads = cfg->threads > 0 ? cfg->threads : icnet::default_thread_count();
    bc.fit = to_fit_config(*fit);
    bc.path = to_path_config(*path);
    if (cfg->progress) {
      const auto fn = cfg->progress;
      void* user = cfg->progress_user;
      bc.on_done = [fn, user](const icnet::ReplicateResult& r) {
        const auto c = to_c(r);
        fn(&c, user);
      };
    }
    auto results = icnet::run_benchmark(bc);
    bc.on_done = nullptr;
    *out = new icnet_benchmark{std::move(bc), std::move(results)};
  });
}

size_t icnet_benchmark_count(const icnet_benchmark* b) { return b ? b->results.size() : 0; }

icnet_status icnet_benchmark_result(const icnet_benchmark* b, size_t k, icnet_replicate* out) {
  return guarded([&] {
    require(b && out, "null argument");
    require(k < b->results.size(), "result index out of range");
    *out = to_c(b->results[k]);
  });
}

icnet_status icnet_benchmark_summary(const icnet_benchmark* b, size_t n, const char* metric, double* mean,
                                     double* sd) {
  return guarded([&] {
    require(b && metric && mean && sd, "null argument");
    for (const auto& s : icnet::summarize(b->results)) {
      if (s.n == n && s.metric == metric) {
        *mean = s.mean;
        *sd = s.sd;
        return;
      }
    }
    throw icnet::ConfigError("no summary for n=" + std::to_string(n) + " and metric '" + metric + "'");
  });
}

icnet_status icnet_benchmark_write_csv(const icnet_benchmark* b, const char* path) {
  return guarded([&] {
    require(b && path, "null argument");
    std::ostringstream ss;
    icnet::write_results_csv(ss, b->cfg, b->results);
    icnet::write_text_file(path, ss.str());
  });
}

void icnet_benchmark_free(icnet_benchmark* b) { delete b; }

}  // extern "C"
