#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "icnet/errors.hpp"
#include "icnet/hierprox.hpp"
#include "icnet/simgen.hpp"
#include "icnet/trainer.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numeric>

using namespace icnet;

namespace {

// Interval-censored sample with a risk m(z) = sum_j beta_j z_j drawn from the
// Gompertz baseline and ten uniform inspections on [0, 1].
Dataset linear_design(std::size_t n, const std::vector<double>& beta, int d, std::uint64_t seed,
                      std::vector<double>* true_risk_out = nullptr) {
  Rng rng(seed);
  const auto z = gen_covariates(n, d, rng);
  const GompertzBaseline b(5.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::vector<IntervalSample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) m += beta[j] * z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    if (true_risk_out) true_risk_out->push_back(m);
    const double t = event_time_from_exponential(expo(rng), m, b);
    const auto o = gen_censoring(t, {10, 1.0}, rng);
    auto& s = samples[i];
    s.u = o.u;
    s.v = o.v;
    s.delta1 = o.delta1;
    s.delta2 = o.delta2;
    s.z.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) s.z[static_cast<std::size_t>(j)] = z(static_cast<Eigen::Index>(i), j);
  }
  return Dataset(samples);
}

FitConfig quick_config() {
  FitConfig cfg;
  cfg.epochs = 10;
  cfg.outer_iters = 5;
  cfg.learning_rate = 0.05;
  cfg.net.hidden_widths = {6};
  cfg.seed = 3;
  return cfg;
}

bool bitwise_equal(const ResidualRiskNet& a, const ResidualRiskNet& b) {
  if (a.theta != b.theta || a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (a.layers[l].weight != b.layers[l].weight || a.layers[l].bias != b.layers[l].bias) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("configuration validation") {
  FitConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.outer_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FitConfig{};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FitConfig{};
  cfg.hierarchy_M = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FitConfig{};
  cfg.penalty_lambda = -1e-3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FitConfig{};
  cfg.net.hidden_widths = {};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  PathConfig p;
  CHECK_NOTHROW(p.validate());
  p.val_fraction = 0.6;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = PathConfig{};
  p.multiplier = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("a single profile pass with no epochs keeps the initial network") {
  const auto data = linear_design(80, {1.0, -1.0}, 3, 1);
  FitConfig cfg = quick_config();
  cfg.epochs = 0;
  cfg.outer_iters = 1;
  cfg.standardize = false;
  cfg.icm.tol = 1e-14;
  cfg.icm.max_iter = 20000;
  const auto model = fit(data, cfg);
  NetConfig nc = cfg.net;
  nc.init_seed = cfg.seed;
  auto init = ResidualRiskNet::initialize(3, nc);
  const Eigen::VectorXd r0 = init.forward(data.covariates());
  const auto icm = icm_profile(data, std::vector<double>(r0.data(), r0.data() + r0.size()), std::nullopt, cfg.icm);
  CHECK(model.final_loglik == doctest::Approx(icm.loglik).epsilon(1e-9));
  init.center_at_origin();
  CHECK(bitwise_equal(model.net, init));
  CHECK(model.diagnostics.epochs_run == 0);
}

TEST_CASE("a huge penalty shrinks everything and predicts the baseline") {
  const auto data = linear_design(100, {1.5, 0.0, -1.0}, 4, 2);
  FitConfig cfg = quick_config();
  cfg.penalty_lambda = 1e6;
  cfg.icm.tol = 1e-14;
  cfg.icm.max_iter = 20000;
  const auto model = fit(data, cfg);
  CHECK(model.net.theta.isZero(0.0));
  CHECK(model.net.first_layer().isZero(0.0));
  CHECK(model.selected_features.empty());
  CHECK(model.diagnostics.max_full_shrinkage_lambda <= cfg.penalty_lambda);

  const auto npmle = icm_profile(Standardization::fit(data).apply(data), std::vector<double>(data.size(), 0.0), std::nullopt, cfg.icm);
  REQUIRE(npmle.hazard.values.size() == model.baseline.values.size());
  // Compared on the survival scale: values past the last informative time
  // sit at the unbounded-direction cap and only their survival is meaningful.
  for (std::size_t k = 0; k < npmle.hazard.values.size(); ++k) {
    CHECK(std::abs(std::exp(-model.baseline.values[k]) - std::exp(-npmle.hazard.values[k])) <= 1e-6);
  }
  oracle::Rng rng(71);
  std::vector<double> times{0.0, 0.1, 0.3, 0.6, 0.9, 2.0};
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> z(4);
    for (auto& x : z) x = oracle::uniform(rng, -3, 3);
    CHECK(predict_risk(model, z) == 0.0);
    const auto s = predict_survival(model, z, times);
    for (std::size_t k = 0; k < times.size(); ++k) CHECK(s[k] == std::exp(-model.baseline(times[k])));
  }
}

TEST_CASE("hierarchy holds after every epoch and profiling never lowers the likelihood") {
  for (double lambda : {0.0, 1e-3, 1e-2, 5e-2}) {
    const auto data = linear_design(120, {1.0, 2.0, -1.0}, 6, 4);
    FitConfig cfg = quick_config();
    cfg.penalty_lambda = lambda;
    cfg.hierarchy_M = 2.0;
    cfg.objective_tol = 0.0;
    const auto model = fit(data, cfg);
    const auto& diag = model.diagnostics;
    CHECK(diag.epochs_run == cfg.epochs * cfg.outer_iters);
    CHECK(diag.max_hierarchy_violation <= 0.0);
    CHECK(hierarchy_violation(model.net.theta, model.net.first_layer(), cfg.hierarchy_M) <= 0.0);
    REQUIRE(diag.loglik_after_icm.size() == static_cast<std::size_t>(cfg.outer_iters));
    for (std::size_t k = 0; k < diag.loglik_after_icm.size(); ++k) {
      CHECK(diag.loglik_after_icm[k] >= diag.loglik_before_icm[k] - 1e-10);
    }
    CHECK(model.selected_features == active_features(model.net));
    CHECK(std::is_sorted(model.baseline.values.begin(), model.baseline.values.end()));
    CHECK(model.baseline.values.front() >= 0.0);
  }
}

TEST_CASE("single linear feature: sign recovery and positive risk correlation") {
  for (double beta : {2.0, -2.0}) {
    std::vector<double> truth;
    const auto data = linear_design(300, {beta}, 3, 5, &truth);
    FitConfig cfg = quick_config();
    cfg.outer_iters = 10;
    cfg.epochs = 20;
    const auto model = fit(data, cfg);
    CHECK((model.net.theta(0) > 0) == (beta > 0));
    std::vector<double> pred;
    for (std::size_t i = 0; i < data.size(); ++i) pred.push_back(predict_risk(model, data.sample(i).z));
    const double n = static_cast<double>(pred.size());
    const double mp = std::accumulate(pred.begin(), pred.end(), 0.0) / n;
    const double mt = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
    double cov = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) cov += (pred[i] - mp) * (truth[i] - mt);
    CHECK(cov > 0.0);
  }
}

TEST_CASE("identical inputs give bitwise identical fits") {
  const auto data = linear_design(100, {1.0, -1.0}, 4, 6);
  FitConfig cfg = quick_config();
  cfg.penalty_lambda = 1e-2;
  const auto a = fit(data, cfg);
  const auto b = fit(data, cfg);
  CHECK(bitwise_equal(a.net, b.net));
  CHECK(a.baseline.values == b.baseline.values);
  CHECK(a.final_loglik == b.final_loglik);
}

TEST_CASE("property: predictions are monotone in time and ordered by risk") {
  const auto data = linear_design(150, {1.0, -0.5, 0.5}, 4, 7);
  FitConfig cfg = quick_config();
  const auto model = fit(data, cfg);
  std::vector<double> times;
  for (int k = 0; k <= 60; ++k) times.push_back(0.02 * k);
  CHECK(predict_survival(model, data.sample(0).z, std::vector<double>{0.0})[0] <= 1.0);
  const double before_first = std::nextafter(model.baseline.times.front(), 0.0);
  CHECK(predict_survival(model, data.sample(0).z, std::vector<double>{before_first})[0] == 1.0);
  // The standardization mean maps to the origin, where the risk is exactly 0.
  const auto at_zero = predict_survival(model, model.standardization.mean, times);
  for (std::size_t k = 0; k < times.size(); ++k) CHECK(at_zero[k] == std::exp(-model.baseline(times[k])));

  oracle::Rng rng(72);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> z1(4), z2(4);
    for (auto& x : z1) x = oracle::uniform(rng, -2, 2);
    for (auto& x : z2) x = oracle::uniform(rng, -2, 2);
    const auto s1 = predict_survival(model, z1, times);
    const auto s2 = predict_survival(model, z2, times);
    CHECK(std::is_sorted(s1.rbegin(), s1.rend()));
    const double r1 = predict_risk(model, z1), r2 = predict_risk(model, z2);
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (r1 > r2) CHECK(s1[k] <= s2[k]);
      if (r1 < r2) CHECK(s1[k] >= s2[k]);
    }
    const auto ch = predict_cumhaz(model, z1);
    for (std::size_t k = 0; k < times.size(); ++k) CHECK(std::exp(-ch(times[k])) == doctest::Approx(s1[k]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(predict_risk(model, std::vector<double>(3, 0.0)), DomainError);
  CHECK_THROWS_AS(predict_survival(model, data.sample(0).z, std::vector<double>{-1.0}), DomainError);
}

TEST_CASE("stratified split preserves censoring proportions") {
  SimConfig sc;
  sc.n = 500;
  sc.d = 5;
  const auto data = simulate_study(sc).data;
  const auto [train, val] = stratified_split(data, 0.2, 9);
  CHECK(train.size() + val.size() == data.size());
  std::vector<int> all(train.begin(), train.end());
  all.insert(all.end(), val.begin(), val.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == static_cast<int>(i));
  for (Censoring c : {Censoring::Left, Censoring::Interval, Censoring::Right}) {
    double in_val = 0, total = 0;
    for (std::size_t i = 0; i < data.size(); ++i) total += data.kind()[i] == c;
    for (auto i : val) in_val += data.kind()[i] == c;
    CHECK(std::abs(in_val - 0.2 * total) <= 0.5 + 1e-9);
  }
  const auto again = stratified_split(data, 0.2, 9);
  CHECK(again.second == val);
}

TEST_CASE("regularisation path on a small problem") {
  SimConfig sc;
  sc.n = 150;
  sc.d = 6;
  sc.seed = 8;
  const auto data = simulate_study(sc).data;
  FitConfig cfg = quick_config();
  PathConfig pc;
  pc.multiplier = 1.5;
  pc.bisection_steps = 4;
  pc.ibs_grid_n = 30;
  const auto res = fit_path(data, cfg, pc);
  REQUIRE(!res.lambdas.empty());
  CHECK(res.n_active.back() == 0);
  for (std::size_t k = 1; k < res.lambdas.size(); ++k) CHECK(res.lambdas[k] > res.lambdas[k - 1]);
  CHECK(res.best_index < res.models.size());
  for (std::size_t k = 0; k < res.val_ibs.size(); ++k) {
    CHECK(res.val_ibs[res.best_index] <= res.val_ibs[k]);
    if (k > res.best_index) CHECK(res.val_ibs[k] > res.val_ibs[res.best_index]);
  }
  CHECK(res.t1 < res.t2);
  for (const auto& m : res.models) CHECK(m.diagnostics.max_hierarchy_violation <= 0.0);

  const auto again = fit_path(data, cfg, pc);
  CHECK(again.lambdas == res.lambdas);
  CHECK(again.best_index == res.best_index);
  CHECK(again.best().selected_features == res.best().selected_features);
}

TEST_CASE("path on pure noise keeps few features") {
  const auto data = linear_design(200, {}, 8, 10);
  FitConfig cfg = quick_config();
  PathConfig pc;
  pc.multiplier = 1.3;
  pc.bisection_steps = 4;
  pc.ibs_grid_n = 30;
  const auto res = fit_path(data, cfg, pc);
  MESSAGE("noise path: best n_active " << res.best().selected_features.size() << " of 8");
  CHECK(res.best().selected_features.size() <= 2);
}

TEST_CASE("a validation split without informative samples is rejected") {
  std::vector<IntervalSample> samples;
  for (int i = 0; i < 20; ++i) samples.push_back({1.0 + i, 1.0 + i, 0, 0, {0.1 * i}});
  samples.push_back({0.5, 0.5, 1, 0, {0.3}});
  const Dataset data(samples);
  CHECK_THROWS_AS(fit_path(data, quick_config(), PathConfig{}), DataError);
}
