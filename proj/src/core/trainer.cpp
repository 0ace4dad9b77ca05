#include "icnet/trainer.hpp"

#include "icnet/errors.hpp"
#include "icnet/hierprox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace icnet {

void FitConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (outer_iters < 1) throw ConfigError("outer iterations must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
  if (!(hierarchy_M > 0.0) || !std::isfinite(hierarchy_M)) throw ConfigError("hierarchy multiplier M must be positive");
  if (!(penalty_lambda >= 0.0) || !std::isfinite(penalty_lambda)) throw ConfigError("penalty lambda must be >= 0");
  if (net.hidden_widths.empty()) throw ConfigError("at least one hidden layer is required");
  for (int w : net.hidden_widths) {
    if (w < 1) throw ConfigError("hidden widths must be positive");
  }
  if (!(objective_tol >= 0.0)) throw ConfigError("objective tolerance must be >= 0");
}

void PathConfig::validate() const {
  if (!(val_fraction > 0.0 && val_fraction <= 0.5)) throw ConfigError("validation fraction must lie in (0, 0.5]");
  if (!(multiplier > 1.0) || !std::isfinite(multiplier)) throw ConfigError("path multiplier must exceed 1");
  if (max_path_length < 1) throw ConfigError("max path length must be >= 1");
  if (!(lambda_start_factor > 0.0)) throw ConfigError("lambda start factor must be positive");
  if (!(dense_active_fraction > 0.0 && dense_active_fraction <= 1.0)) {
    throw ConfigError("dense active fraction must lie in (0, 1]");
  }
  if (bisection_steps < 0) throw ConfigError("bisection steps must be >= 0");
  if (ibs_grid_n < 2) throw ConfigError("IBS grid needs at least two points");
}

std::vector<int> active_features(const ResidualRiskNet& net) {
  std::vector<int> out;
  for (Eigen::Index j = 0; j < net.theta.size(); ++j) {
    if (net.theta(j) != 0.0) out.push_back(static_cast<int>(j));
  }
  return out;
}

namespace {

void fill_endpoint_values(const TimeGrid& grid, const std::vector<double>& values, std::vector<double>& lu,
                          std::vector<double>& lv) {
  for (std::size_t i = 0; i < lu.size(); ++i) {
    lu[i] = grid.u_index[i] < 0 ? 0.0 : values[static_cast<std::size_t>(grid.u_index[i])];
    lv[i] = grid.v_index[i] < 0 ? 0.0 : values[static_cast<std::size_t>(grid.v_index[i])];
  }
}

double l1_norm(const Eigen::VectorXd& v) { return v.cwiseAbs().sum(); }

constexpr int kMaxStepHalvings = 40;

double smooth_loss(const ResidualRiskNet& net, const Dataset& data, std::span<const double> lu,
                   std::span<const double> lv, double scale) {
  const Eigen::VectorXd r = net.forward(data.covariates());
  if (!r.allFinite()) return std::numeric_limits<double>::infinity();
  return -scale * loglik(data, {r.data(), static_cast<std::size_t>(r.size())}, lu, lv).value;
}

// <grad, a - b> over all parameters.
double inner_product(const NetGradients& g, const ResidualRiskNet& a, const ResidualRiskNet& b) {
  double s = g.theta.dot(a.theta - b.theta);
  for (std::size_t l = 0; l < g.layers.size(); ++l) {
    s += (g.layers[l].weight.array() * (a.layers[l].weight - b.layers[l].weight).array()).sum();
    s += g.layers[l].bias.dot(a.layers[l].bias - b.layers[l].bias);
  }
  return s;
}

double squared_distance(const ResidualRiskNet& a, const ResidualRiskNet& b) {
  double s = (a.theta - b.theta).squaredNorm();
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    s += (a.layers[l].weight - b.layers[l].weight).squaredNorm();
    s += (a.layers[l].bias - b.layers[l].bias).squaredNorm();
  }
  return s;
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

FittedModel fit_standardized(const Dataset& data, const TimeGrid& grid, const FitConfig& cfg,
                             const Standardization& transform, const FittedModel* warm) {
  cfg.validate();
  const auto n = data.size();
  const int d = data.dim();
  const auto& z = data.covariates();

  ResidualRiskNet net;
  if (warm) {
    net = warm->net;
  } else {
    NetConfig nc = cfg.net;
    nc.init_seed = cfg.seed;
    net = ResidualRiskNet::initialize(d, nc);
  }
  if (net.input_dim() != d) throw DomainError("warm-start network dimension does not match the data");

  FitDiagnostics diag;
  diag.identifiable = std::any_of(data.kind().begin(), data.kind().end(),
                                  [](Censoring k) { return k != Censoring::Right; });
  diag.max_hierarchy_violation = -std::numeric_limits<double>::infinity();

  std::optional<std::span<const double>> init;
  if (warm && warm->baseline.times == grid.points) init = std::span<const double>(warm->baseline.values);

  Eigen::VectorXd risks = net.forward(z);
  auto icm = icm_profile(data, grid, as_span(risks), init, cfg.icm);
  diag.boundary = icm.boundary;
  std::vector<double> values = icm.hazard.values;
  const double lambda = cfg.penalty_lambda;
  const double alpha = cfg.learning_rate;
  const double M = cfg.hierarchy_M;
  const double nn = static_cast<double>(n);
  double prev_obj = -icm.loglik / nn + lambda * l1_norm(net.theta);

  std::vector<double> lu(n), lv(n);
  double step = alpha;
  for (int k = 1; k <= cfg.outer_iters; ++k) {
    fill_endpoint_values(grid, values, lu, lv);
    for (int b = 1; b <= cfg.epochs; ++b) {
      const auto lg = loss_and_grad(net, data, lu, lv, 1.0 / nn);
      if (!std::isfinite(lg.loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at outer iteration " << k << ", epoch " << b;
        throw NumericalError(msg.str());
      }
      // Proximal gradient step; the step is halved until the smooth loss
      // satisfies the quadratic upper-bound condition, so a stiff likelihood
      // cannot make the iterates blow up.
      ResidualRiskNet next;
      bool accepted = false;
      for (int h = 0; h <= kMaxStepHalvings; ++h) {
        next = gradient_step(net, lg.grad, step);
        const auto& w1 = next.first_layer();
        double shrink_bound = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
          shrink_bound = std::max(shrink_bound, (std::abs(next.theta(j)) + M * w1.col(j).cwiseAbs().sum()) / step);
        }
        hier_prox_inplace(next.theta, next.first_layer(), {step * lambda, M});
        const double f_next = smooth_loss(next, data, lu, lv, 1.0 / nn);
        const double linear = inner_product(lg.grad, next, net);
        const double dist2 = squared_distance(next, net);
        if (std::isfinite(f_next) && f_next <= lg.loss + linear + 0.5 * dist2 / step + 1e-12 * std::abs(lg.loss)) {
          diag.max_full_shrinkage_lambda = std::max(diag.max_full_shrinkage_lambda, shrink_bound);
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        std::ostringstream msg;
        msg << "no descent step found at outer iteration " << k << ", epoch " << b;
        throw NumericalError(msg.str());
      }
      net = std::move(next);
      diag.max_hierarchy_violation =
          std::max(diag.max_hierarchy_violation, hierarchy_violation(net.theta, net.first_layer(), M));
      ++diag.epochs_run;
    }

    risks = net.forward(z);
    if (!risks.allFinite()) throw NumericalError("non-finite risk scores after outer iteration " + std::to_string(k));
    diag.loglik_before_icm.push_back(grid_loglik(data, grid, as_span(risks), values).value);
    icm = icm_profile(data, grid, as_span(risks), std::span<const double>(values), cfg.icm);
    diag.boundary = diag.boundary || icm.boundary;
    values = icm.hazard.values;
    diag.loglik_after_icm.push_back(icm.loglik);

    const double obj = -icm.loglik / nn + lambda * l1_norm(net.theta);
    diag.objective.push_back(obj);
    if (!std::isfinite(obj)) throw NumericalError("non-finite objective at outer iteration " + std::to_string(k));
    if (std::abs(obj - prev_obj) < cfg.objective_tol) break;
    prev_obj = obj;
  }
  if (diag.epochs_run == 0) diag.max_hierarchy_violation = hierarchy_violation(net.theta, net.first_layer(), M);

  // Risk scores are identified up to an additive constant; move it into the
  // baseline so that r(0) = 0.
  const double offset = net.center_at_origin();
  const double factor = std::exp(offset);
  for (auto& v : values) v *= factor;

  FittedModel model;
  model.net = std::move(net);
  model.baseline = StepCumulativeHazard(grid.points, std::move(values));
  model.standardization = transform;
  model.hierarchy_M = M;
  model.penalty_lambda = lambda;
  model.selected_features = active_features(model.net);
  risks = model.net.forward(z);
  model.final_loglik = grid_loglik(data, grid, as_span(risks), model.baseline.values).value;
  model.diagnostics = std::move(diag);
  return model;
}

FittedModel fit(const Dataset& data, const FitConfig& cfg) {
  cfg.validate();
  const auto transform = cfg.standardize ? Standardization::fit(data) : Standardization::identity(data.dim());
  const auto std_data = transform.apply(data);
  return fit_standardized(std_data, build_time_grid(std_data), cfg, transform, nullptr);
}

double predict_risk(const FittedModel& model, std::span<const double> z) {
  if (static_cast<int>(z.size()) != model.dim()) throw DomainError("covariate vector has the wrong dimension");
  const auto zs = model.standardization.apply(z);
  return model.net.forward_one(zs);
}

std::vector<double> predict_survival(const FittedModel& model, std::span<const double> z,
                                     std::span<const double> times) {
  const double r = predict_risk(model, z);
  std::vector<double> out(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0)) throw DomainError("prediction times must be nonnegative");
    out[k] = survival(model.baseline(times[k]), r);
  }
  return out;
}

StepCumulativeHazard predict_cumhaz(const FittedModel& model, std::span<const double> z) {
  const double scale = std::exp(predict_risk(model, z));
  auto values = model.baseline.values;
  for (auto& v : values) v *= scale;
  return StepCumulativeHazard(model.baseline.times, std::move(values));
}

IbsEvaluation evaluate_ibs(const FittedModel& model, const Dataset& test, const StepSurvivalEstimate& g,
                           const BrierConfig& cfg) {
  if (test.dim() != model.dim()) throw DomainError("test data dimension does not match the model");
  const auto pairs = surrogate_pairs(test);
  const Eigen::VectorXd risks = model.net.forward(model.standardization.apply(test).covariates());
  const Eigen::VectorXd scale = risks.array().exp();

  IbsEvaluation out;
  out.times = ibs_grid(cfg);
  out.brier.reserve(out.times.size());
  std::vector<double> surv(test.size());
  for (double t : out.times) {
    const double h = model.baseline(t);
    for (std::size_t i = 0; i < test.size(); ++i) surv[i] = std::exp(-h * scale(static_cast<Eigen::Index>(i)));
    const auto bs = brier_t(pairs, surv, g, t);
    out.dropped = std::max(out.dropped, bs.dropped);
    out.brier.push_back(bs.value);
  }
  out.value = ibs(out.times, out.brier, cfg);
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(const Dataset& data, double val_fraction,
                                                                             std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("validation fraction must lie in (0, 1)");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> train, val;
  for (Censoring c : {Censoring::Left, Censoring::Interval, Censoring::Right}) {
    std::vector<std::size_t> group;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.kind()[i] == c) group.push_back(i);
    }
    std::shuffle(group.begin(), group.end(), rng);
    const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(group.size())));
    val.insert(val.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_val));
    train.insert(train.end(), group.begin() + static_cast<std::ptrdiff_t>(n_val), group.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {std::move(train), std::move(val)};
}

namespace {

double full_shrinkage_lambda(const ResidualRiskNet& net, double M, double alpha) {
  double bound = 0.0;
  const auto& w1 = net.first_layer();
  for (Eigen::Index j = 0; j < net.theta.size(); ++j) {
    bound = std::max(bound, (std::abs(net.theta(j)) + M * w1.col(j).cwiseAbs().sum()) / alpha);
  }
  return bound;
}

}  // namespace

PathResult fit_path(const Dataset& data, const FitConfig& cfg, const PathConfig& path) {
  cfg.validate();
  path.validate();

  PathResult res;
  std::tie(res.train_rows, res.val_rows) = stratified_split(data, path.val_fraction, cfg.seed);
  if (res.train_rows.empty() || res.val_rows.empty()) throw DataError("train/validation split left an empty part");
  const auto raw_train = data.subset(res.train_rows);
  const auto raw_val = data.subset(res.val_rows);
  if (std::all_of(raw_val.kind().begin(), raw_val.kind().end(), [](Censoring k) { return k == Censoring::Right; })) {
    throw DataError("validation split contains no informative (left- or interval-censored) samples");
  }

  const auto transform = cfg.standardize ? Standardization::fit(raw_train) : Standardization::identity(data.dim());
  const auto train = transform.apply(raw_train);
  const auto grid = build_time_grid(train);

  std::tie(res.t1, res.t2) = default_brier_limits(data);
  BrierConfig bcfg{res.t1, res.t2, path.weighting, path.ibs_grid_n};
  const auto g = km_censoring(surrogate_pairs(raw_train));

  // Dense start: hierarchy constraint only.
  FitConfig dense_cfg = cfg;
  dense_cfg.penalty_lambda = 0.0;
  const FittedModel dense = fit_standardized(train, grid, dense_cfg, transform, nullptr);

  double lambda0 = path.lambda_start;
  if (!(lambda0 > 0.0)) {
    const double hi_bound = std::max(full_shrinkage_lambda(dense.net, cfg.hierarchy_M, cfg.learning_rate), 1e-12);
    double lo = std::log(hi_bound * 1e-4);
    double hi = std::log(hi_bound);
    const double target = path.dense_active_fraction * static_cast<double>(data.dim());
    FitConfig probe = cfg;
    probe.outer_iters = 1;
    for (int s = 0; s < path.bisection_steps; ++s) {
      const double mid = 0.5 * (lo + hi);
      probe.penalty_lambda = std::exp(mid);
      const auto trial = fit_standardized(train, grid, probe, transform, &dense);
      if (static_cast<double>(trial.selected_features.size()) >= target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    lambda0 = std::exp(lo);
  }
  lambda0 *= path.lambda_start_factor;

  const FittedModel* warm = &dense;
  double lambda = lambda0;
  for (int step = 0; step < path.max_path_length; ++step) {
    FitConfig step_cfg = cfg;
    step_cfg.penalty_lambda = lambda;
    FittedModel model = fit_standardized(train, grid, step_cfg, transform, warm);
    const auto eval = evaluate_ibs(model, raw_val, g, bcfg);

    res.lambdas.push_back(lambda);
    res.val_ibs.push_back(eval.value);
    res.train_loglik.push_back(model.final_loglik);
    res.n_active.push_back(static_cast<int>(model.selected_features.size()));
    res.models.push_back(std::move(model));
    warm = &res.models.back();
    if (res.n_active.back() == 0) break;
    lambda *= path.multiplier;
  }

  // Ties go to the larger (sparser) lambda.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < res.val_ibs.size(); ++k) {
    if (res.val_ibs[k] <= best) {
      best = res.val_ibs[k];
      res.best_index = k;
    }
  }
  return res;
}

}  // namespace icnet
