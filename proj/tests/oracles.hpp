#pragma once

// Slow, independent reference implementations and random generators shared by
// the unit and acceptance tests.

#include "icnet/risknet.hpp"
#include "icnet/survival.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Golden-section search for the maximiser of a unimodal f on [lo, hi].
inline double golden_max(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int k = 0; k < iters; ++k) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Isotonic regression by enumerating every partition into consecutive blocks
// and keeping the cheapest one whose block means are nondecreasing.
inline std::vector<double> pava_bruteforce(const std::vector<double>& y, const std::vector<double>& w) {
  const std::size_t n = y.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<double> x(n);
    std::size_t start = 0;
    double prev_mean = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      const bool cut = i == n - 1 || (mask >> i) & 1u;
      if (!cut) continue;
      double sw = 0.0, swy = 0.0;
      for (std::size_t k = start; k <= i; ++k) {
        sw += w[k];
        swy += w[k] * y[k];
      }
      const double mean = swy / sw;
      if (mean < prev_mean - 1e-15) ok = false;
      for (std::size_t k = start; k <= i; ++k) x[k] = mean;
      prev_mean = mean;
      start = i + 1;
    }
    if (!ok) continue;
    double obj = 0.0;
    for (std::size_t k = 0; k < n; ++k) obj += w[k] * (x[k] - y[k]) * (x[k] - y[k]);
    if (obj < best) {
      best = obj;
      best_x = x;
    }
  }
  return best_x;
}

// Per-feature hierarchical prox objective at magnitude t >= 0 with the
// column clipped to M t (the optimal w for a given t).
inline double prox_profile(double theta, const Eigen::VectorXd& w, double t, double lam, double M) {
  double obj = 0.5 * (t - std::abs(theta)) * (t - std::abs(theta)) + lam * t;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double e = std::max(std::abs(w(i)) - M * t, 0.0);
    obj += 0.5 * e * e;
  }
  return obj;
}

// Full objective for an arbitrary (t, w) candidate, used to score outputs.
inline double prox_objective(double theta, const Eigen::VectorXd& w, double t_new, const Eigen::VectorXd& w_new,
                             double lam) {
  return 0.5 * (t_new - theta) * (t_new - theta) + 0.5 * (w_new - w).squaredNorm() + lam * std::abs(t_new);
}

// Grid search over t followed by golden-section refinement around the best
// grid cell. The profile is convex in t, so this finds the global minimum.
inline double prox_oracle_min(double theta, const Eigen::VectorXd& w, double lam, double M) {
  const double hi = std::abs(theta) + M * w.cwiseAbs().sum() + 1.0;
  const int grid = 4000;
  double best_t = 0.0;
  double best = prox_profile(theta, w, 0.0, lam, M);
  for (int k = 1; k <= grid; ++k) {
    const double t = hi * k / grid;
    const double v = prox_profile(theta, w, t, lam, M);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  const double step = hi / grid;
  const double lo_t = std::max(0.0, best_t - step);
  const double t = golden_max([&](double s) { return -prox_profile(theta, w, s, lam, M); }, lo_t, best_t + step, 300);
  return std::min(best, std::min(prox_profile(theta, w, t, lam, M), prox_profile(theta, w, 0.0, lam, M)));
}

// Random interval-censored dataset with covariates in [-1.5, 1.5].
inline icnet::Dataset random_dataset(Rng& rng, std::size_t n, int d) {
  std::vector<icnet::IntervalSample> samples(n);
  for (auto& s : samples) {
    s.z.resize(static_cast<std::size_t>(d));
    for (auto& x : s.z) x = uniform(rng, -1.5, 1.5);
    const int kind = uniform_int(rng, 0, 2);
    s.u = uniform(rng, 0.1, 1.0);
    if (kind == 0) {
      s.delta1 = 1;
      s.v = s.u;
    } else if (kind == 1) {
      s.delta2 = 1;
      s.v = s.u + uniform(rng, 0.1, 1.0);
    } else {
      s.v = s.u;
    }
  }
  return icnet::Dataset(samples);
}

inline icnet::ResidualRiskNet random_net(Rng& rng, int d, const std::vector<int>& widths, double scale = 1.0) {
  icnet::NetConfig cfg;
  cfg.hidden_widths = widths;
  cfg.init_seed = rng();
  cfg.init_scale = scale;
  auto net = icnet::ResidualRiskNet::initialize(d, cfg);
  for (Eigen::Index j = 0; j < net.theta.size(); ++j) net.theta(j) = uniform(rng, -0.5, 0.5);
  return net;
}

// Applies f to every scalar parameter of the network in a fixed order.
template <class F>
void for_each_param(icnet::ResidualRiskNet& net, F&& f) {
  for (Eigen::Index j = 0; j < net.theta.size(); ++j) f(net.theta(j));
  for (auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) f(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) f(l.bias(r));
  }
}

template <class F>
void for_each_grad(icnet::NetGradients& g, F&& f) {
  for (Eigen::Index j = 0; j < g.theta.size(); ++j) f(g.theta(j));
  for (auto& l : g.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) f(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) f(l.bias(r));
  }
}

// Direct log-likelihood from the closed-form survival probabilities, without
// any of the library's log-domain rewriting.
inline double naive_loglik(const icnet::Dataset& data, const std::vector<double>& risks, const std::vector<double>& lu,
                           const std::vector<double>& lv) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double e = std::exp(risks[i]);
    switch (data.kind()[i]) {
      case icnet::Censoring::Left:
        s += std::log(1.0 - std::exp(-lu[i] * e));
        break;
      case icnet::Censoring::Interval:
        s += std::log(std::exp(-lu[i] * e) - std::exp(-lv[i] * e));
        break;
      case icnet::Censoring::Right:
        s -= lv[i] * e;
        break;
    }
  }
  return s;
}

// Minimal two-sided Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

}  // namespace oracle
