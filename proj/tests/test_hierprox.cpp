#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "icnet/errors.hpp"
#include "icnet/hierprox.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace icnet;

namespace {

Eigen::VectorXd random_vec(oracle::Rng& rng, int k, double scale) {
  Eigen::VectorXd v(k);
  for (int i = 0; i < k; ++i) v(i) = oracle::uniform(rng, -scale, scale);
  return v;
}

}  // namespace

TEST_CASE("zero penalty keeps a feasible point") {
  Eigen::VectorXd theta(2);
  theta << 0.5, -1.0;
  Eigen::MatrixXd w(3, 2);
  w << 0.1, -2.0, 0.2, 1.0, -0.3, 3.0;
  const auto r = hier_prox(theta, w, {0.0, 10.0});
  CHECK((r.theta - theta).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((r.w1 - w).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("large penalty zeroes everything") {
  Eigen::VectorXd theta(1);
  theta << 0.8;
  Eigen::MatrixXd w(2, 1);
  w << 0.4, -0.6;
  // Full shrinkage once lam >= |theta| + M * sum |W|.
  const auto r = hier_prox(theta, w, {0.8 + 2.0 * 1.0 + 1e-12, 2.0});
  CHECK(r.theta(0) == 0.0);
  CHECK(r.w1.isZero(0.0));
}

TEST_CASE("scalar case reduces to soft thresholding with clipped weights") {
  Eigen::VectorXd theta(1);
  theta << 2.0;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, 1);
  const auto r = hier_prox(theta, w, {0.5, 10.0});
  CHECK(r.theta(0) == doctest::Approx(1.5));
  CHECK(r.w1(0, 0) == 0.0);
}

TEST_CASE("zero theta with active weights re-enters with positive sign") {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd w(2, 1);
  w << 3.0, -1.0;
  const auto r = hier_prox(theta, w, {0.1, 1.0});
  CHECK(r.theta(0) > 0.0);
  CHECK(hierarchy_violation(r.theta, r.w1, 1.0) <= 0.0);
}

TEST_CASE("property: optimality against the grid oracle and exact feasibility") {
  oracle::Rng rng(41);
  for (int rep = 0; rep < 300; ++rep) {
    const int K = oracle::uniform_int(rng, 1, 3);
    const double M = oracle::uniform(rng, 0.2, 10.0);
    const double lam = oracle::uniform(rng, 0.0, 2.0);
    Eigen::VectorXd theta(1);
    theta(0) = oracle::uniform(rng, -2, 2);
    const Eigen::MatrixXd w = random_vec(rng, K, 2.0);
    const auto r = hier_prox(theta, w, {lam, M});
    CHECK(r.w1.col(0).cwiseAbs().maxCoeff() <= M * std::abs(r.theta(0)));
    const double got = oracle::prox_objective(theta(0), w.col(0), r.theta(0), r.w1.col(0), lam);
    const double best = oracle::prox_oracle_min(theta(0), w.col(0), lam, M);
    CHECK(got <= best + 1e-8);
    // Nonexpansive in theta and sign preserving.
    CHECK(std::abs(r.theta(0)) <= std::abs(theta(0)) + M * w.cwiseAbs().sum() + 1e-12);
    if (theta(0) != 0.0 && r.theta(0) != 0.0) CHECK((r.theta(0) > 0) == (theta(0) > 0));
  }
}

TEST_CASE("property: features are separable and permutation equivariant") {
  oracle::Rng rng(42);
  for (int rep = 0; rep < 50; ++rep) {
    const int d = oracle::uniform_int(rng, 2, 6);
    const int K = oracle::uniform_int(rng, 1, 4);
    const Eigen::VectorXd theta = random_vec(rng, d, 1.0);
    Eigen::MatrixXd w(K, d);
    for (int j = 0; j < d; ++j) w.col(j) = random_vec(rng, K, 1.0);
    const ProxParams p{oracle::uniform(rng, 0, 1), oracle::uniform(rng, 0.5, 5)};
    const auto r = hier_prox(theta, w, p);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(d);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + d, rng);
    const Eigen::VectorXd ptheta = perm * theta;
    const Eigen::MatrixXd pw = w * perm.transpose();
    const auto pr = hier_prox(ptheta, pw, p);
    CHECK((pr.theta - perm * r.theta).cwiseAbs().maxCoeff() == 0.0);
    CHECK((pr.w1 - r.w1 * perm.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("property: sparsity is monotone in the step penalty") {
  oracle::Rng rng(43);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd theta(1);
    theta(0) = oracle::uniform(rng, -1, 1);
    const Eigen::MatrixXd w = random_vec(rng, oracle::uniform_int(rng, 1, 4), 1.0);
    const double M = oracle::uniform(rng, 0.5, 5);
    bool zero_seen = false;
    for (double lam = 0.0; lam <= 10.0; lam += 0.05) {
      const auto r = hier_prox(theta, w, {lam, M});
      if (zero_seen) CHECK(r.theta(0) == 0.0);
      zero_seen = zero_seen || r.theta(0) == 0.0;
    }
  }
}

TEST_CASE("argument validation") {
  Eigen::VectorXd theta(2);
  theta << 1, 2;
  Eigen::MatrixXd w(3, 1);
  CHECK_THROWS_AS(hier_prox(theta, w, {0.1, 1.0}), DomainError);
  Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(3, 2);
  CHECK_THROWS_AS(hier_prox(theta, w2, {-0.1, 1.0}), ConfigError);
  CHECK_THROWS_AS(hier_prox(theta, w2, {0.1, 0.0}), ConfigError);
}
