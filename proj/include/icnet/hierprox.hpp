#pragma once

// Hierarchical proximal operator linking the skip weight theta_j of each
// feature to its first-layer weights: soft-thresholds theta_j and clips the
// column so that max_i |W_ij| <= M |theta_j|.

#include <Eigen/Core>

namespace icnet {

struct ProxParams {
  double lam_step = 0.0;  // step size times penalty
  double M = 10.0;        // hierarchy multiplier
};

struct ProxResult {
  Eigen::VectorXd theta;
  Eigen::MatrixXd w1;
};

// Exact minimiser, per feature j, of
//   1/2 (t - theta_j)^2 + 1/2 ||w - W_j||^2 + lam_step |t|  s.t. ||w||_inf <= M |t|.
ProxResult hier_prox(const Eigen::VectorXd& theta, const Eigen::MatrixXd& w1, const ProxParams& p);

// In-place variant used by the trainer.
void hier_prox_inplace(Eigen::VectorXd& theta, Eigen::MatrixXd& w1, const ProxParams& p);

// Largest violation of max_i |W_ij| - M |theta_j| (<= 0 when feasible).
double hierarchy_violation(const Eigen::VectorXd& theta, const Eigen::MatrixXd& w1, double M);

}  // namespace icnet
