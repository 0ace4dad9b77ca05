#pragma once

// Core survival types: interval-censored samples, step cumulative hazards,
// the Gompertz baseline and the interval-censored Cox log-likelihood.

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace icnet {

// Which of the three censoring patterns a sample follows.
enum class Censoring {
  Left,      // T <= u          (delta1 = 1)
  Interval,  // u < T <= v      (delta2 = 1)
  Right,     // T > v           (delta3 = 1)
};

struct IntervalSample {
  double u = 0.0;
  double v = 0.0;
  int delta1 = 0;
  int delta2 = 0;
  std::vector<double> z;

  int delta3() const { return 1 - delta1 - delta2; }
  Censoring censoring() const;
};

// Validated collection of samples sharing one covariate dimension. Covariates
// are stored row-major as an n x d matrix.
class Dataset {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Dataset() = default;
  explicit Dataset(const std::vector<IntervalSample>& samples);
  Dataset(Matrix z, std::vector<double> u, std::vector<double> v, std::vector<Censoring> kind);

  std::size_t size() const { return u_.size(); }
  int dim() const { return static_cast<int>(z_.cols()); }
  bool empty() const { return u_.empty(); }

  const Matrix& covariates() const { return z_; }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& v() const { return v_; }
  const std::vector<Censoring>& kind() const { return kind_; }

  IntervalSample sample(std::size_t i) const;
  std::vector<IntervalSample> samples() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset with_covariates(Matrix z) const;
  // Concatenation of two datasets with the same dimension.
  static Dataset concat(const Dataset& a, const Dataset& b);

 private:
  void validate() const;

  Matrix z_;
  std::vector<double> u_;
  std::vector<double> v_;
  std::vector<Censoring> kind_;
};

// Right-continuous, nondecreasing step function; zero before the first jump.
struct StepCumulativeHazard {
  std::vector<double> times;
  std::vector<double> values;

  StepCumulativeHazard() = default;
  StepCumulativeHazard(std::vector<double> t, std::vector<double> v);

  double operator()(double t) const;
  bool empty() const { return times.empty(); }
};

struct GompertzBaseline {
  double gamma = 5.0;
  double lam = 1.0;

  GompertzBaseline() = default;
  GompertzBaseline(double gamma_, double lam_);

  double cumhaz(double t) const;
  // Solves cumhaz(t) = h for t.
  double inverse_cumhaz(double h) const;
};

double eval_cumhaz(const StepCumulativeHazard& h, double t);
double gompertz_cumhaz(const GompertzBaseline& b, double t);

// S(t|z) = exp(-Lambda(t) * exp(r(z))).
double survival(double cumhaz_at_t, double risk);

// Probabilities whose logarithm would be -inf are floored at this value.
inline constexpr double kProbabilityFloor = 1e-300;

struct LogLikelihood {
  double value = 0.0;
  std::size_t floored = 0;  // samples whose probability hit kProbabilityFloor
};

// Value and first/second derivatives of one sample's log-likelihood term.
// d_* are first derivatives; c_* are negated second derivatives (>= 0).
struct SampleTerm {
  double value = 0.0;
  bool floored = false;
  double d_risk = 0.0;
  double d_lu = 0.0;
  double d_lv = 0.0;
  double c_lu = 0.0;
  double c_lv = 0.0;
};

SampleTerm sample_term(Censoring kind, double lu, double lv, double risk);

// Interval-censored Cox log-likelihood with LU[i] = Lambda(u_i), LV[i] = Lambda(v_i).
LogLikelihood loglik(const Dataset& data, std::span<const double> risks,
                     std::span<const double> lu, std::span<const double> lv);

// Per-feature affine transform applied to covariates before fitting.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> sd;

  static Standardization fit(const Dataset& data);
  static Standardization identity(int d);

  int dim() const { return static_cast<int>(mean.size()); }
  Dataset apply(const Dataset& data) const;
  std::vector<double> apply(std::span<const double> z) const;
};

}  // namespace icnet
