#pragma once

// Profile likelihood over the baseline cumulative hazard: weighted isotonic
// regression and a line-searched iterative convex minorant (ICM) solver.

#include "icnet/survival.hpp"

#include <optional>
#include <span>
#include <vector>

namespace icnet {

// Least-squares projection of y onto nondecreasing sequences under weights w.
std::vector<double> weighted_pava(std::span<const double> y, std::span<const double> w);

// Distinct examination times that carry likelihood terms. u_index[i] is set
// for left- and interval-censored samples, v_index[i] for interval- and
// right-censored ones; unused entries are -1.
struct TimeGrid {
  std::vector<double> points;
  std::vector<int> u_index;
  std::vector<int> v_index;

  std::size_t size() const { return points.size(); }
};

TimeGrid build_time_grid(const Dataset& data);

struct IcmConfig {
  double tol = 1e-7;  // relative log-likelihood change
  int max_iter = 500;
  int max_halvings = 30;
  double value_cap = 1e8;
  double curvature_floor = 1e-8;
};

struct IcmResult {
  StepCumulativeHazard hazard;  // on the grid points
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  // Some top grid points only carry terms that increase with Lambda; their
  // maximiser is unbounded and they are pinned at value_cap.
  bool boundary = false;
  std::vector<double> trace;  // log-likelihood at the start and after every accepted step
};

struct GradCurv {
  std::vector<double> gradient;
  std::vector<double> curvature;  // floored negative diagonal Hessian
};

GradCurv grad_and_curv_lambda(const Dataset& data, const TimeGrid& grid, std::span<const double> risks,
                              std::span<const double> values, double curvature_floor = IcmConfig{}.curvature_floor);

// Log-likelihood with Lambda given by grid values.
LogLikelihood grid_loglik(const Dataset& data, const TimeGrid& grid, std::span<const double> risks,
                          std::span<const double> values);

IcmResult icm_profile(const Dataset& data, const TimeGrid& grid, std::span<const double> risks,
                      std::optional<std::span<const double>> init, const IcmConfig& cfg = {});

IcmResult icm_profile(const Dataset& data, std::span<const double> risks,
                      std::optional<std::span<const double>> init = std::nullopt, const IcmConfig& cfg = {});

}  // namespace icnet
