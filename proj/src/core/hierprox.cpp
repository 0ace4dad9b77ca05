#include "icnet/hierprox.hpp"

#include "icnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace icnet {

namespace {

// Objective of the per-feature problem for a candidate (t, clip level).
double feature_objective(double theta, const Eigen::Ref<const Eigen::VectorXd>& w, double t, double level,
                         double lam) {
  double obj = 0.5 * (t - theta) * (t - theta) + lam * std::abs(t);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double excess = std::max(std::abs(w(i)) - level, 0.0);
    obj += 0.5 * excess * excess;
  }
  return obj;
}

void prox_feature(double& theta, Eigen::Ref<Eigen::VectorXd> w, double lam, double M, std::vector<double>& sorted) {
  const auto K = static_cast<std::size_t>(w.size());
  sorted.resize(K);
  for (std::size_t i = 0; i < K; ++i) sorted[i] = std::abs(w(static_cast<Eigen::Index>(i)));
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  const double abs_theta = std::abs(theta);
  const double sign = theta < 0.0 ? -1.0 : 1.0;  // sign(0) = +1

  auto level_for = [&](std::size_t m, double partial) {
    const double shrunk = std::max(abs_theta + M * partial - lam, 0.0);
    return M / (1.0 + static_cast<double>(m) * M * M) * shrunk;
  };

  double chosen = -1.0;
  double partial = 0.0;
  for (std::size_t m = 0; m <= K; ++m) {
    if (m > 0) partial += sorted[m - 1];
    const double wm = level_for(m, partial);
    const double upper = m == 0 ? std::numeric_limits<double>::infinity() : sorted[m - 1];
    const double lower = m == K ? 0.0 : sorted[m];
    if (upper >= wm && wm >= lower) {
      chosen = wm;
      break;
    }
  }
  if (chosen < 0.0) {
    // Rounding left no bracket satisfied; take the best candidate level.
    double best = std::numeric_limits<double>::infinity();
    partial = 0.0;
    for (std::size_t m = 0; m <= K; ++m) {
      if (m > 0) partial += sorted[m - 1];
      const double wm = level_for(m, partial);
      const double obj = feature_objective(abs_theta, w, wm / M, wm, lam);
      if (obj < best) {
        best = obj;
        chosen = wm;
      }
    }
  }

  const double t = chosen / M;
  const double level = M * t;  // clip to exactly M|t| as evaluated by the feasibility check
  theta = sign * t;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double a = std::min(level, std::abs(w(i)));
    w(i) = w(i) < 0.0 ? -a : a;
  }
}

}  // namespace

void hier_prox_inplace(Eigen::VectorXd& theta, Eigen::MatrixXd& w1, const ProxParams& p) {
  if (w1.cols() != theta.size()) throw DomainError("hier_prox: first layer must have one column per feature");
  if (!(p.lam_step >= 0.0) || !std::isfinite(p.lam_step)) throw ConfigError("hier_prox: lam_step must be >= 0");
  if (!(p.M > 0.0) || !std::isfinite(p.M)) throw ConfigError("hier_prox: M must be positive and finite");
  std::vector<double> scratch;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    prox_feature(theta(j), w1.col(j), p.lam_step, p.M, scratch);
  }
}

ProxResult hier_prox(const Eigen::VectorXd& theta, const Eigen::MatrixXd& w1, const ProxParams& p) {
  ProxResult r{theta, w1};
  hier_prox_inplace(r.theta, r.w1, p);
  return r;
}

double hierarchy_violation(const Eigen::VectorXd& theta, const Eigen::MatrixXd& w1, double M) {
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double col_max = w1.rows() > 0 ? w1.col(j).cwiseAbs().maxCoeff() : 0.0;
    worst = std::max(worst, col_max - M * std::abs(theta(j)));
  }
  return worst;
}

}  // namespace icnet
