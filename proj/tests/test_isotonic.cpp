#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "icnet/errors.hpp"
#include "icnet/isotonic.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace icnet;

namespace {

IntervalSample left_at(double u) { return {u, u, 1, 0, {0.0}}; }
IntervalSample right_at(double v) { return {v, v, 0, 0, {0.0}}; }
IntervalSample interval(double u, double v) { return {u, v, 0, 1, {0.0}}; }

bool nondecreasing(const std::vector<double>& x) { return std::is_sorted(x.begin(), x.end()); }

}  // namespace

TEST_CASE("weighted PAVA examples") {
  const std::vector<double> ones3{1, 1, 1};
  CHECK(weighted_pava(std::vector<double>{1, 2, 3}, ones3) == std::vector<double>{1, 2, 3});
  CHECK(weighted_pava(std::vector<double>{3, 1}, std::vector<double>{1, 1}) == std::vector<double>{2, 2});
  const auto x = weighted_pava(std::vector<double>{1, 3, 2}, ones3);
  const auto want = oracle::pava_bruteforce({1, 3, 2}, {1, 1, 1});
  for (std::size_t k = 0; k < 3; ++k) CHECK(x[k] == doctest::Approx(want[k]).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(2.5));
  CHECK_THROWS_AS(weighted_pava(std::vector<double>{}, std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(weighted_pava(std::vector<double>{1, 2}, std::vector<double>{1, 0}), DomainError);
  CHECK_THROWS_AS(weighted_pava(std::vector<double>{1, 2}, std::vector<double>{1}), DomainError);
}

TEST_CASE("property: PAVA is monotone, idempotent and matches the block oracle") {
  oracle::Rng rng(21);
  for (int rep = 0; rep < 500; ++rep) {
    const int n = oracle::uniform_int(rng, 1, 8);
    std::vector<double> y(n), w(n);
    for (int i = 0; i < n; ++i) {
      y[i] = oracle::uniform(rng, -3, 3);
      w[i] = oracle::uniform(rng, 0.1, 4);
    }
    const auto x = weighted_pava(y, w);
    CHECK(nondecreasing(x));
    const auto again = weighted_pava(x, w);
    for (int i = 0; i < n; ++i) CHECK(again[i] == doctest::Approx(x[i]).epsilon(1e-13));
    const auto want = oracle::pava_bruteforce(y, w);
    for (int i = 0; i < n; ++i) CHECK(std::abs(x[i] - want[i]) <= 1e-8);
    auto sorted = y;
    std::sort(sorted.begin(), sorted.end());
    const auto same = weighted_pava(sorted, w);
    for (int i = 0; i < n; ++i) CHECK(same[i] == doctest::Approx(sorted[i]).epsilon(1e-14));
  }
}

TEST_CASE("time grid construction") {
  const auto g1 = build_time_grid(Dataset({right_at(1), right_at(2)}));
  CHECK(g1.points == std::vector<double>{1, 2});
  CHECK(g1.u_index == std::vector<int>{-1, -1});
  CHECK(g1.v_index == std::vector<int>{0, 1});

  const auto g2 = build_time_grid(Dataset({left_at(1), right_at(1)}));
  CHECK(g2.points == std::vector<double>{1});
  CHECK(g2.u_index[0] == 0);
  CHECK(g2.v_index[1] == 0);

  // Mixed set against a direct set construction.
  const Dataset mixed({left_at(0.7), interval(0.2, 0.9), right_at(0.4), interval(0.4, 1.3), left_at(0.2)});
  std::vector<double> expect{0.7, 0.2, 0.9, 0.4, 0.4, 1.3, 0.2};
  std::sort(expect.begin(), expect.end());
  expect.erase(std::unique(expect.begin(), expect.end()), expect.end());
  const auto g3 = build_time_grid(mixed);
  CHECK(g3.points == expect);
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    const auto s = mixed.sample(i);
    if (s.delta1 || s.delta2) CHECK(g3.points[static_cast<std::size_t>(g3.u_index[i])] == s.u);
    if (s.delta2 || s.delta3()) CHECK(g3.points[static_cast<std::size_t>(g3.v_index[i])] == s.v);
    if (s.delta2) CHECK(g3.u_index[i] < g3.v_index[i]);
  }
}

TEST_CASE("ICM analytic profiles") {
  SUBCASE("all right-censored gives zero hazard") {
    const Dataset d({right_at(1), right_at(2), right_at(3)});
    const std::vector<double> r{0.3, -0.2, 1.0};
    const auto res = icm_profile(d, r);
    for (double v : res.hazard.values) CHECK(v == 0.0);
  }
  SUBCASE("one left and one right at the same time") {
    const Dataset d({left_at(1), right_at(1)});
    const std::vector<double> r{0.0, 0.0};
    const double want = oracle::golden_max([](double x) { return std::log(1 - std::exp(-x)) - x; }, 1e-6, 10);
    const auto res = icm_profile(d, r);
    CHECK(std::abs(res.hazard.values[0] - want) <= 1e-4);
    CHECK(res.converged);
  }
  SUBCASE("two left and one right") {
    const Dataset d({left_at(1), left_at(1), right_at(1)});
    const std::vector<double> r{0.0, 0.0, 0.0};
    const double want = oracle::golden_max([](double x) { return 2 * std::log(1 - std::exp(-x)) - x; }, 1e-6, 10);
    const auto res = icm_profile(d, r);
    CHECK(std::abs(res.hazard.values[0] - want) <= 1e-4);
  }
  SUBCASE("left-censored only is unbounded and flagged") {
    const Dataset d({left_at(1), left_at(1)});
    const std::vector<double> r{0.0, 0.0};
    const auto res = icm_profile(d, r);
    CHECK(res.boundary);
    CHECK(res.hazard.values[0] == IcmConfig{}.value_cap);
  }
}

TEST_CASE("property: ICM ascent, permutation invariance and stationarity") {
  oracle::Rng rng(22);
  for (int rep = 0; rep < 40; ++rep) {
    const auto n = static_cast<std::size_t>(oracle::uniform_int(rng, 4, 25));
    auto data = oracle::random_dataset(rng, n, 1);
    std::vector<double> risks(n);
    for (auto& r : risks) r = oracle::uniform(rng, -1, 1);
    const auto grid = build_time_grid(data);
    const auto res = icm_profile(data, grid, risks, std::nullopt);

    for (std::size_t k = 1; k < res.trace.size(); ++k) CHECK(res.trace[k] >= res.trace[k - 1] - 1e-12);
    CHECK(nondecreasing(res.hazard.values));
    CHECK(res.hazard.values.front() >= 0.0);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> prisks(n);
    for (std::size_t i = 0; i < n; ++i) prisks[i] = risks[perm[i]];
    const auto pres = icm_profile(data.subset(perm), prisks);
    REQUIRE(pres.hazard.values.size() == res.hazard.values.size());
    if (!res.boundary) {
      for (std::size_t k = 0; k < res.hazard.values.size(); ++k) {
        CHECK(std::abs(pres.hazard.values[k] - res.hazard.values[k]) <= 1e-6 * std::max(1.0, res.hazard.values[k]));
      }
      // Monotone-preserving single-point perturbations do not improve.
      const double base = grid_loglik(data, grid, risks, res.hazard.values).value;
      auto vals = res.hazard.values;
      for (std::size_t k = 0; k < vals.size(); ++k) {
        for (double step : {1e-3, -1e-3}) {
          auto p = vals;
          p[k] += step;
          const double lo = k == 0 ? 0.0 : p[k - 1];
          const double hi = k + 1 == p.size() ? 1e300 : p[k + 1];
          if (p[k] < lo || p[k] > hi) continue;
          CHECK(grid_loglik(data, grid, risks, p).value <= base + 1e-8);
        }
      }
    }
  }
}

TEST_CASE("grid gradient matches finite differences") {
  oracle::Rng rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const auto n = static_cast<std::size_t>(oracle::uniform_int(rng, 2, 15));
    const auto data = oracle::random_dataset(rng, n, 1);
    const auto grid = build_time_grid(data);
    std::vector<double> risks(n);
    for (auto& r : risks) r = oracle::uniform(rng, -1, 1);
    std::vector<double> vals(grid.size());
    double acc = 0.0;
    for (auto& v : vals) v = acc += oracle::uniform(rng, 0.05, 0.5);
    const auto gc = grad_and_curv_lambda(data, grid, risks, vals);
    const double h = 1e-6;
    for (std::size_t k = 0; k < vals.size(); ++k) {
      auto plus = vals, minus = vals;
      plus[k] += h;
      minus[k] -= h;
      const double fd = (grid_loglik(data, grid, risks, plus).value - grid_loglik(data, grid, risks, minus).value) / (2 * h);
      CHECK(std::abs(gc.gradient[k] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
      CHECK(gc.curvature[k] > 0.0);
    }
  }
}

TEST_CASE("ICM warm start never ends below its start") {
  oracle::Rng rng(24);
  const auto data = oracle::random_dataset(rng, 20, 1);
  const std::vector<double> risks(20, 0.0);
  const auto grid = build_time_grid(data);
  std::vector<double> init(grid.size());
  for (std::size_t k = 0; k < init.size(); ++k) init[k] = 0.01 * static_cast<double>(k + 1);
  const double start = grid_loglik(data, grid, risks, init).value;
  const auto res = icm_profile(data, grid, risks, std::span<const double>(init));
  CHECK(res.loglik >= start);
}
