#pragma once

// Evaluation metrics: censoring Kaplan-Meier, IPCW Brier score, integrated
// Brier score, baseline hazard L2 error, risk R^2 and selection rates.

#include "icnet/survival.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace icnet {

// Point surrogate of an interval observation used by the Brier score.
struct SurrogatePair {
  double y = 0.0;  // (u + v) / 2
  int gamma = 0;   // 1 - delta3
};

SurrogatePair surrogate(const IntervalSample& s);
std::vector<SurrogatePair> surrogate_pairs(const Dataset& data);

// Right-continuous nonincreasing step survival function starting at 1.
struct StepSurvivalEstimate {
  std::vector<double> times;
  std::vector<double> values;

  double operator()(double t) const;
  double left_limit(double t) const;  // value on (-inf, t)
};

// Kaplan-Meier estimate of the censoring survival (gamma == 0 is the event).
StepSurvivalEstimate km_censoring(std::span<const SurrogatePair> train);

enum class IbsWeighting {
  Paper,    // integral of t * BS(t) / t2 over [t1, t2]
  Uniform,  // mean of BS(t) over [t1, t2]
};

const char* to_string(IbsWeighting w);
IbsWeighting ibs_weighting_from_string(const std::string& s);

struct BrierConfig {
  double t1 = 0.0;
  double t2 = 1.0;
  IbsWeighting weighting = IbsWeighting::Paper;
  int grid_n = 100;
};

inline constexpr double kMinCensoringWeight = 1e-10;

struct BrierValue {
  double value = 0.0;
  std::size_t dropped = 0;  // samples excluded for a vanishing censoring weight
};

BrierValue brier_t(std::span<const SurrogatePair> test, std::span<const double> surv_at_t,
                   const StepSurvivalEstimate& g, double t);

// Equally spaced evaluation grid on [t1, t2].
std::vector<double> ibs_grid(const BrierConfig& cfg);

// Trapezoidal integrated Brier score from BS(t) sampled at ts.
double ibs(std::span<const double> ts, std::span<const double> bs, const BrierConfig& cfg);

// Linear-interpolation (type 7) sample quantile.
double empirical_quantile(std::vector<double> values, double p);

// 0.05 and 0.95 empirical quantiles of the merged u and v borders.
std::pair<double, double> default_brier_limits(const Dataset& data);

double l2_hazard_error(const StepCumulativeHazard& est, const GompertzBaseline& truth, double t_lo, double t_hi,
                       int grid_n);

// Squared Pearson correlation.
double r2_risk(std::span<const double> pred, std::span<const double> truth);
// Same, but NaN instead of an error when either argument is constant, as for
// a model with no active features.
double r2_risk_or_nan(std::span<const double> pred, std::span<const double> truth);

struct SelectionRates {
  double tp = 0.0;  // NaN when the true support is empty
  double tn = 0.0;  // NaN when the true support is everything
};

SelectionRates selection_tp_tn(std::span<const int> selected, std::span<const int> true_support, int d);

}  // namespace icnet
