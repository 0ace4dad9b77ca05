#include "icnet/metrics.hpp"

#include "icnet/errors.hpp"
#include "numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace icnet {

SurrogatePair surrogate(const IntervalSample& s) {
  return {0.5 * (s.u + s.v), s.delta3() == 1 ? 0 : 1};
}

std::vector<SurrogatePair> surrogate_pairs(const Dataset& data) {
  std::vector<SurrogatePair> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = {0.5 * (data.u()[i] + data.v()[i]), data.kind()[i] == Censoring::Right ? 0 : 1};
  }
  return out;
}

double StepSurvivalEstimate::operator()(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

double StepSurvivalEstimate::left_limit(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

StepSurvivalEstimate km_censoring(std::span<const SurrogatePair> train) {
  if (train.empty()) throw DomainError("km_censoring: empty sample");
  std::vector<SurrogatePair> sorted(train.begin(), train.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.y < b.y; });

  StepSurvivalEstimate g;
  double s = 1.0;
  std::size_t i = 0;
  const std::size_t n = sorted.size();
  while (i < n) {
    const double t = sorted[i].y;
    const std::size_t at_risk = n - i;
    std::size_t events = 0;
    std::size_t j = i;
    while (j < n && sorted[j].y == t) {
      if (sorted[j].gamma == 0) ++events;
      ++j;
    }
    if (events > 0) {
      s *= 1.0 - static_cast<double>(events) / static_cast<double>(at_risk);
      g.times.push_back(t);
      g.values.push_back(s);
    }
    i = j;
  }
  return g;
}

const char* to_string(IbsWeighting w) { return w == IbsWeighting::Paper ? "paper" : "uniform"; }

IbsWeighting ibs_weighting_from_string(const std::string& s) {
  if (s == "paper") return IbsWeighting::Paper;
  if (s == "uniform") return IbsWeighting::Uniform;
  throw ConfigError("unknown IBS weighting '" + s + "' (expected paper or uniform)");
}

BrierValue brier_t(std::span<const SurrogatePair> test, std::span<const double> surv_at_t,
                   const StepSurvivalEstimate& g, double t) {
  if (test.empty()) throw DomainError("brier_t: empty test sample");
  if (surv_at_t.size() != test.size()) throw DomainError("brier_t: one survival prediction per sample is required");
  const double g_t = g(t);
  detail::CompensatedSum sum;
  BrierValue out;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double s = surv_at_t[i];
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("brier_t: survival predictions must lie in [0,1]");
    if (test[i].y <= t && test[i].gamma == 1) {
      const double gy = g.left_limit(test[i].y);
      if (gy < kMinCensoringWeight) {
        ++out.dropped;
        continue;
      }
      sum.add(s * s / gy);
    } else if (test[i].y > t) {
      if (g_t < kMinCensoringWeight) {
        std::ostringstream msg;
        msg << "brier_t: censoring survival vanishes at t=" << t << " while samples are still at risk";
        throw NumericalError(msg.str());
      }
      sum.add((1.0 - s) * (1.0 - s) / g_t);
    }
  }
  out.value = sum.value() / static_cast<double>(test.size());
  return out;
}

std::vector<double> ibs_grid(const BrierConfig& cfg) {
  if (!(cfg.t1 >= 0.0) || !(cfg.t1 < cfg.t2)) throw ConfigError("IBS limits need 0 <= t1 < t2");
  if (cfg.grid_n < 2) throw ConfigError("IBS grid needs at least two points");
  std::vector<double> ts(static_cast<std::size_t>(cfg.grid_n));
  const double h = (cfg.t2 - cfg.t1) / static_cast<double>(cfg.grid_n - 1);
  for (int k = 0; k < cfg.grid_n; ++k) ts[static_cast<std::size_t>(k)] = cfg.t1 + h * k;
  ts.back() = cfg.t2;
  return ts;
}

double ibs(std::span<const double> ts, std::span<const double> bs, const BrierConfig& cfg) {
  if (!(cfg.t1 < cfg.t2)) throw ConfigError("IBS limits need t1 < t2");
  if (ts.size() != bs.size() || ts.size() < 2) throw DomainError("ibs: need at least two matched grid points");
  if (ts.front() > cfg.t1 || ts.back() < cfg.t2) throw DomainError("ibs: grid does not cover [t1, t2]");
  auto integrand = [&](std::size_t k) {
    return cfg.weighting == IbsWeighting::Paper ? ts[k] * bs[k] / cfg.t2 : bs[k];
  };
  detail::CompensatedSum sum;
  for (std::size_t k = 1; k < ts.size(); ++k) {
    sum.add(0.5 * (ts[k] - ts[k - 1]) * (integrand(k) + integrand(k - 1)));
  }
  const double integral = sum.value();
  return cfg.weighting == IbsWeighting::Paper ? integral : integral / (cfg.t2 - cfg.t1);
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("empirical_quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("empirical_quantile: p must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::pair<double, double> default_brier_limits(const Dataset& data) {
  std::vector<double> borders(data.u());
  borders.insert(borders.end(), data.v().begin(), data.v().end());
  return {empirical_quantile(borders, 0.05), empirical_quantile(std::move(borders), 0.95)};
}

double l2_hazard_error(const StepCumulativeHazard& est, const GompertzBaseline& truth, double t_lo, double t_hi,
                       int grid_n) {
  if (!(t_lo < t_hi) || !(t_lo >= 0.0)) throw DomainError("l2_hazard_error: need 0 <= t_lo < t_hi");
  if (grid_n < 2) throw DomainError("l2_hazard_error: grid needs at least two points");
  const double h = (t_hi - t_lo) / static_cast<double>(grid_n - 1);
  auto sq_err = [&](int k) {
    const double t = k == grid_n - 1 ? t_hi : t_lo + h * k;
    const double diff = est(t) - truth.cumhaz(t);
    return diff * diff;
  };
  detail::CompensatedSum sum;
  double prev = sq_err(0);
  for (int k = 1; k < grid_n; ++k) {
    const double cur = sq_err(k);
    sum.add(0.5 * h * (prev + cur));
    prev = cur;
  }
  return std::sqrt(sum.value());
}

double r2_risk(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.size() < 2) throw DomainError("r2_risk: need two equal-length vectors of size >= 2");
  const double n = static_cast<double>(pred.size());
  const double mp = std::accumulate(pred.begin(), pred.end(), 0.0) / n;
  const double mt = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double a = pred[i] - mp;
    const double b = truth[i] - mt;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw NumericalError("r2_risk: undefined for a constant argument");
  return std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
}

double r2_risk_or_nan(std::span<const double> pred, std::span<const double> truth) {
  try {
    return r2_risk(pred, truth);
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

SelectionRates selection_tp_tn(std::span<const int> selected, std::span<const int> true_support, int d) {
  if (d < 1) throw DomainError("selection_tp_tn: d must be positive");
  std::set<int> sel, truth;
  for (int j : selected) {
    if (j < 0 || j >= d) throw DomainError("selection_tp_tn: selected index out of range");
    sel.insert(j);
  }
  for (int j : true_support) {
    if (j < 0 || j >= d) throw DomainError("selection_tp_tn: support index out of range");
    truth.insert(j);
  }
  std::size_t hits = 0, true_neg = 0;
  for (int j = 0; j < d; ++j) {
    const bool s = sel.count(j) > 0;
    const bool t = truth.count(j) > 0;
    if (s && t) ++hits;
    if (!s && !t) ++true_neg;
  }
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  const auto n_true = truth.size();
  const auto n_false = static_cast<std::size_t>(d) - n_true;
  return {n_true == 0 ? nan : static_cast<double>(hits) / static_cast<double>(n_true),
          n_false == 0 ? nan : static_cast<double>(true_neg) / static_cast<double>(n_false)};
}

}  // namespace icnet
