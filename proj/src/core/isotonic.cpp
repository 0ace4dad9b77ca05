#include "icnet/isotonic.hpp"

#include "icnet/errors.hpp"
#include "numeric.hpp"

#include <algorithm>
#include <cmath>

namespace icnet {

std::vector<double> weighted_pava(std::span<const double> y, std::span<const double> w) {
  if (y.empty()) throw DomainError("weighted_pava: empty input");
  if (y.size() != w.size()) throw DomainError("weighted_pava: value and weight lengths differ");
  for (double wi : w) {
    if (!(wi > 0.0) || !std::isfinite(wi)) throw DomainError("weighted_pava: weights must be positive and finite");
  }

  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean >= blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      auto& prev = blocks.back();
      const double weight = prev.weight + top.weight;
      prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / weight;
      prev.weight = weight;
      prev.count += top.count;
    }
  }

  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

TimeGrid build_time_grid(const Dataset& data) {
  const auto n = data.size();
  const auto& kind = data.kind();
  const auto& u = data.u();
  const auto& v = data.v();

  std::vector<double> pts;
  pts.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (kind[i] != Censoring::Right) pts.push_back(u[i]);
    if (kind[i] != Censoring::Left) pts.push_back(v[i]);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  TimeGrid grid;
  grid.points = std::move(pts);
  grid.u_index.assign(n, -1);
  grid.v_index.assign(n, -1);
  auto index_of = [&](double t) {
    return static_cast<int>(std::lower_bound(grid.points.begin(), grid.points.end(), t) - grid.points.begin());
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (kind[i] != Censoring::Right) grid.u_index[i] = index_of(u[i]);
    if (kind[i] != Censoring::Left) grid.v_index[i] = index_of(v[i]);
  }
  return grid;
}

namespace {

void check_grid(const Dataset& data, const TimeGrid& grid, std::span<const double> risks,
                std::span<const double> values) {
  if (grid.u_index.size() != data.size() || grid.v_index.size() != data.size()) {
    throw DomainError("time grid does not match the dataset");
  }
  if (risks.size() != data.size()) throw DomainError("risk vector length must equal the sample count");
  if (values.size() != grid.size()) throw DomainError("hazard values must have one entry per grid point");
}

double value_at(std::span<const double> values, int idx) {
  return idx < 0 ? 0.0 : values[static_cast<std::size_t>(idx)];
}

}  // namespace

LogLikelihood grid_loglik(const Dataset& data, const TimeGrid& grid, std::span<const double> risks,
                          std::span<const double> values) {
  check_grid(data, grid, risks, values);
  detail::CompensatedSum sum;
  LogLikelihood out;
  const auto& kind = data.kind();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto term = sample_term(kind[i], value_at(values, grid.u_index[i]), value_at(values, grid.v_index[i]), risks[i]);
    if (term.floored) ++out.floored;
    sum.add(term.value);
  }
  out.value = sum.value();
  return out;
}

GradCurv grad_and_curv_lambda(const Dataset& data, const TimeGrid& grid, std::span<const double> risks,
                              std::span<const double> values, double curvature_floor) {
  check_grid(data, grid, risks, values);
  GradCurv gc;
  gc.gradient.assign(grid.size(), 0.0);
  gc.curvature.assign(grid.size(), 0.0);
  const auto& kind = data.kind();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int ui = grid.u_index[i];
    const int vi = grid.v_index[i];
    const auto term = sample_term(kind[i], value_at(values, ui), value_at(values, vi), risks[i]);
    if (ui >= 0) {
      gc.gradient[static_cast<std::size_t>(ui)] += term.d_lu;
      gc.curvature[static_cast<std::size_t>(ui)] += term.c_lu;
    }
    if (vi >= 0) {
      gc.gradient[static_cast<std::size_t>(vi)] += term.d_lv;
      gc.curvature[static_cast<std::size_t>(vi)] += term.c_lv;
    }
  }
  for (auto& c : gc.curvature) c = std::max(c, curvature_floor);
  return gc;
}

IcmResult icm_profile(const Dataset& data, const TimeGrid& grid, std::span<const double> risks,
                      std::optional<std::span<const double>> init, const IcmConfig& cfg) {
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1 || cfg.max_halvings < 0 || !std::isfinite(cfg.value_cap) ||
      !(cfg.value_cap > 0.0) || !(cfg.curvature_floor > 0.0)) {
    throw ConfigError("invalid ICM configuration");
  }
  for (double r : risks) {
    if (!std::isfinite(r)) throw DomainError("icm_profile: risks must be finite");
  }
  const auto G = grid.size();
  IcmResult res;
  if (G == 0) {
    res.loglik = grid_loglik(data, grid, risks, {}).value;
    res.converged = true;
    res.trace.push_back(res.loglik);
    return res;
  }

  // Grid points above the last index carrying a decreasing term (interval
  // lower end or right-censoring time) have an unbounded maximiser.
  int last_decreasing = -1;
  const auto& kind = data.kind();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (kind[i] == Censoring::Interval) last_decreasing = std::max(last_decreasing, grid.u_index[i]);
    if (kind[i] == Censoring::Right) last_decreasing = std::max(last_decreasing, grid.v_index[i]);
  }
  const auto n_free = static_cast<std::size_t>(last_decreasing + 1);
  res.boundary = n_free < G;

  std::vector<double> x(G);
  if (init) {
    if (init->size() != G) throw DomainError("icm_profile: init must have one value per grid point");
    for (std::size_t k = 0; k < G; ++k) {
      const double val = (*init)[k];
      if (!(val >= 0.0) || !std::isfinite(val) || (k > 0 && val < (*init)[k - 1])) {
        throw DomainError("icm_profile: init must be nonnegative and nondecreasing");
      }
      x[k] = std::min(val, cfg.value_cap);
    }
  } else {
    for (std::size_t k = 0; k < G; ++k) x[k] = static_cast<double>(k + 1) / static_cast<double>(G + 1);
  }
  for (std::size_t k = n_free; k < G; ++k) x[k] = cfg.value_cap;

  // A warm start can sit on a floored configuration (e.g. an interval sample
  // with equal end values); fall back to the strictly increasing start.
  const auto start = grid_loglik(data, grid, risks, x);
  double ll = start.value;
  if (init && start.floored > 0) {
    std::vector<double> fresh(G);
    for (std::size_t k = 0; k < G; ++k) fresh[k] = k < n_free ? static_cast<double>(k + 1) / static_cast<double>(G + 1) : cfg.value_cap;
    const double ll_fresh = grid_loglik(data, grid, risks, fresh).value;
    if (ll_fresh > ll) {
      x = std::move(fresh);
      ll = ll_fresh;
    }
  }
  res.trace.push_back(ll);

  std::vector<double> cand(G), trial(G);
  for (int iter = 0; iter < cfg.max_iter && n_free > 0; ++iter) {
    res.iterations = iter + 1;
    const auto gc = grad_and_curv_lambda(data, grid, risks, x, cfg.curvature_floor);

    std::vector<double> y(n_free);
    for (std::size_t k = 0; k < n_free; ++k) y[k] = x[k] + gc.gradient[k] / gc.curvature[k];
    const auto proj = weighted_pava(y, std::span<const double>(gc.curvature.data(), n_free));

    double slope = 0.0;
    double max_move = 0.0;
    for (std::size_t k = 0; k < n_free; ++k) {
      cand[k] = std::clamp(proj[k], 0.0, cfg.value_cap);
      const double d = cand[k] - x[k];
      slope += gc.gradient[k] * d;
      max_move = std::max(max_move, std::abs(d));
    }
    if (!(slope > 0.0) || max_move <= 1e-15 * (1.0 + std::abs(x[n_free - 1]))) {
      res.converged = true;
      break;
    }

    // Armijo backtracking along the segment x -> cand keeps every iterate
    // monotone and guarantees ascent.
    double step = 1.0;
    bool accepted = false;
    double ll_new = ll;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      for (std::size_t k = 0; k < G; ++k) trial[k] = k < n_free ? x[k] + step * (cand[k] - x[k]) : x[k];
      ll_new = grid_loglik(data, grid, risks, trial).value;
      if (ll_new >= ll + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = true;
      break;
    }
    const double improvement = ll_new - ll;
    x.swap(trial);
    ll = ll_new;
    res.trace.push_back(ll);
    if (improvement <= cfg.tol * std::max(std::abs(ll), 1e-300)) {
      res.converged = true;
      break;
    }
  }
  if (n_free == 0) res.converged = true;

  res.loglik = ll;
  res.hazard = StepCumulativeHazard(grid.points, std::move(x));
  return res;
}

IcmResult icm_profile(const Dataset& data, std::span<const double> risks,
                      std::optional<std::span<const double>> init, const IcmConfig& cfg) {
  return icm_profile(data, build_time_grid(data), risks, init, cfg);
}

}  // namespace icnet
