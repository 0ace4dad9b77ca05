#include "icnet/simgen.hpp"

#include "icnet/errors.hpp"
#include "icnet/metrics.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace icnet {

std::string to_string(RiskModel m) { return m == RiskModel::M1 ? "m1" : "m2"; }

RiskModel risk_model_from_string(const std::string& s) {
  if (s == "m1") return RiskModel::M1;
  if (s == "m2") return RiskModel::M2;
  throw ConfigError("unknown risk model '" + s + "' (expected m1 or m2)");
}

Eigen::MatrixXd ar1_covariance(int d, double rho) {
  Eigen::MatrixXd s(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
  return s;
}

Dataset::Matrix gen_covariates(std::size_t n, int d, Rng& rng) {
  if (n < 1 || d < 1) throw ConfigError("gen_covariates: n and d must be positive");
  const Eigen::MatrixXd chol = ar1_covariance(d).llt().matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset::Matrix z(static_cast<Eigen::Index>(n), d);
  Eigen::VectorXd e(d);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (int j = 0; j < d; ++j) e(j) = normal(rng);
    z.row(i) = (chol * e).transpose();
  }
  return z;
}

Dataset::Matrix gen_covariates(std::size_t n, int d, std::uint64_t seed) {
  Rng rng(seed);
  return gen_covariates(n, d, rng);
}

double true_risk(RiskModel model, std::span<const double> z) {
  if (z.size() < 4) throw DomainError("true_risk: at least four covariates are required");
  const double z1 = z[0], z2 = z[1], z3 = z[2], z4 = z[3];
  const double linear = -2.0 * z1 + 5.0 * z2 + 3.0 * z3 - 3.0 * z4;
  if (model == RiskModel::M1) return linear;
  return linear + 2.0 * std::abs(z1 * z1 * z1 - 3.0 * std::sin(std::numbers::pi * z1)) +
         4.0 * (z1 * z1 * z3 - std::abs(z2));
}

double event_time_from_exponential(double e, double m, const GompertzBaseline& b) {
  if (!(e >= 0.0)) throw DomainError("exponential draw must be nonnegative");
  return std::log1p(b.gamma * e * std::exp(-m) / b.lam) / b.gamma;
}

double gen_event_time(std::span<const double> z, RiskModel model, const GompertzBaseline& b, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  return event_time_from_exponential(expo(rng), true_risk(model, z), b);
}

CensoredObservation censor_with_inspections(double t_event, std::span<const double> sorted_inspections) {
  if (!(t_event >= 0.0)) throw DomainError("event time must be nonnegative");
  if (sorted_inspections.empty()) throw DomainError("at least one inspection time is required");
  CensoredObservation obs;
  const double first = sorted_inspections.front();
  const double last = sorted_inspections.back();
  if (t_event <= first) {
    obs.delta1 = 1;
    obs.u = obs.v = first;
  } else if (t_event > last) {
    obs.u = obs.v = last;
  } else {
    const auto it = std::lower_bound(sorted_inspections.begin(), sorted_inspections.end(), t_event);
    obs.delta2 = 1;
    obs.v = *it;
    obs.u = *(it - 1);
  }
  return obs;
}

CensoredObservation gen_censoring(double t_event, const InspectionScheme& scheme, Rng& rng) {
  if (scheme.count < 1 || !(scheme.tau > 0.0)) throw ConfigError("inspection scheme needs count >= 1 and tau > 0");
  std::uniform_real_distribution<double> unif(0.0, scheme.tau);
  std::vector<double> insp(static_cast<std::size_t>(scheme.count));
  for (auto& t : insp) t = unif(rng);
  std::sort(insp.begin(), insp.end());
  return censor_with_inspections(t_event, insp);
}

double pilot_inspection_horizon(RiskModel model, int d, const GompertzBaseline& b) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, double, double>, double> cache;
  const auto key = std::make_tuple(static_cast<int>(model), d, b.gamma, b.lam);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  constexpr std::size_t kPilot = 20000;
  Rng rng(0x5eed'1c0f'fee0ULL);
  const auto z = gen_covariates(kPilot, d, rng);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> times(kPilot);
  for (std::size_t i = 0; i < kPilot; ++i) {
    const auto row = z.row(static_cast<Eigen::Index>(i));
    times[i] = event_time_from_exponential(expo(rng), true_risk(model, {row.data(), static_cast<std::size_t>(d)}), b);
  }
  const double tau = empirical_quantile(std::move(times), 0.95);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, tau);
  return tau;
}

SimStudy simulate_study(const SimConfig& cfg) {
  if (cfg.n < 1) throw ConfigError("simulation needs n >= 1");
  if (cfg.d < 4) throw ConfigError("simulation needs d >= 4");
  if (cfg.inspections.count < 1) throw ConfigError("simulation needs at least one inspection");
  const GompertzBaseline baseline(cfg.baseline.gamma, cfg.baseline.lam);

  InspectionScheme scheme = cfg.inspections;
  if (!(scheme.tau > 0.0)) scheme.tau = pilot_inspection_horizon(cfg.model, cfg.d, baseline);

  Rng rng(cfg.seed);
  auto z = gen_covariates(cfg.n, cfg.d, rng);

  SimStudy study;
  auto& truth = study.truth;
  truth.model = cfg.model;
  truth.support = {0, 1, 2, 3};
  truth.baseline = baseline;
  truth.tau = scheme.tau;
  truth.risk.resize(cfg.n);
  truth.event_time.resize(cfg.n);

  std::vector<double> u(cfg.n), v(cfg.n);
  std::vector<Censoring> kind(cfg.n);
  std::exponential_distribution<double> expo(1.0);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const auto row = z.row(static_cast<Eigen::Index>(i));
    const double m = true_risk(cfg.model, {row.data(), static_cast<std::size_t>(cfg.d)});
    const double t = event_time_from_exponential(expo(rng), m, baseline);
    const auto obs = gen_censoring(t, scheme, rng);
    truth.risk[i] = m;
    truth.event_time[i] = t;
    u[i] = obs.u;
    v[i] = obs.v;
    kind[i] = obs.delta1 ? Censoring::Left : obs.delta2 ? Censoring::Interval : Censoring::Right;
  }
  study.data = Dataset(std::move(z), std::move(u), std::move(v), std::move(kind));
  return study;
}

}  // namespace icnet
