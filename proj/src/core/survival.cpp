#include "icnet/survival.hpp"

#include "icnet/errors.hpp"
#include "numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace icnet {

namespace {

const double kLogFloor = std::log(kProbabilityFloor);

// 1 / ((e^y - 1)(1 - e^{-y})), i.e. e^y / (e^y - 1)^2 without overflow.
double curvature_factor(double y) {
  return 1.0 / (std::expm1(y) * -std::expm1(-y));
}

Censoring censoring_from_flags(int d1, int d2) {
  if (d1 < 0 || d1 > 1 || d2 < 0 || d2 > 1 || d1 + d2 > 1) {
    throw DataError("censoring indicators must satisfy delta1, delta2 in {0,1} and delta1 + delta2 <= 1");
  }
  if (d1 == 1) return Censoring::Left;
  if (d2 == 1) return Censoring::Interval;
  return Censoring::Right;
}

}  // namespace

Censoring IntervalSample::censoring() const { return censoring_from_flags(delta1, delta2); }

Dataset::Dataset(const std::vector<IntervalSample>& samples) {
  if (samples.empty()) throw DataError("dataset must contain at least one sample");
  const auto d = samples.front().z.size();
  z_.resize(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(d));
  u_.reserve(samples.size());
  v_.reserve(samples.size());
  kind_.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.z.size() != d) {
      throw DataError("sample " + std::to_string(i) + " has " + std::to_string(s.z.size()) +
                      " covariates, expected " + std::to_string(d));
    }
    u_.push_back(s.u);
    v_.push_back(s.v);
    kind_.push_back(s.censoring());
    for (std::size_t j = 0; j < d; ++j) z_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.z[j];
  }
  validate();
}

Dataset::Dataset(Matrix z, std::vector<double> u, std::vector<double> v, std::vector<Censoring> kind)
    : z_(std::move(z)), u_(std::move(u)), v_(std::move(v)), kind_(std::move(kind)) {
  validate();
}

void Dataset::validate() const {
  const auto n = u_.size();
  if (n == 0) throw DataError("dataset must contain at least one sample");
  if (v_.size() != n || kind_.size() != n || static_cast<std::size_t>(z_.rows()) != n) {
    throw DataError("dataset columns have inconsistent lengths");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double u = u_[i], v = v_[i];
    if (!std::isfinite(u) || !std::isfinite(v) || u < 0.0 || u > v) {
      throw DataError("sample " + std::to_string(i) + ": need finite 0 <= u <= v");
    }
    if (kind_[i] == Censoring::Interval && !(u < v)) {
      throw DataError("sample " + std::to_string(i) + ": interval-censored sample needs u < v");
    }
    if (!z_.row(static_cast<Eigen::Index>(i)).allFinite()) {
      throw DataError("sample " + std::to_string(i) + ": non-finite covariate");
    }
  }
}

IntervalSample Dataset::sample(std::size_t i) const {
  IntervalSample s;
  s.u = u_.at(i);
  s.v = v_[i];
  s.delta1 = kind_[i] == Censoring::Left ? 1 : 0;
  s.delta2 = kind_[i] == Censoring::Interval ? 1 : 0;
  const auto row = z_.row(static_cast<Eigen::Index>(i));
  s.z.assign(row.data(), row.data() + row.size());
  return s;
}

std::vector<IntervalSample> Dataset::samples() const {
  std::vector<IntervalSample> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(sample(i));
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Matrix z(static_cast<Eigen::Index>(rows.size()), z_.cols());
  std::vector<double> u, v;
  std::vector<Censoring> kind;
  u.reserve(rows.size());
  v.reserve(rows.size());
  kind.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = rows[k];
    if (i >= size()) throw DomainError("subset row index out of range");
    z.row(static_cast<Eigen::Index>(k)) = z_.row(static_cast<Eigen::Index>(i));
    u.push_back(u_[i]);
    v.push_back(v_[i]);
    kind.push_back(kind_[i]);
  }
  return Dataset(std::move(z), std::move(u), std::move(v), std::move(kind));
}

Dataset Dataset::with_covariates(Matrix z) const {
  if (z.rows() != z_.rows()) throw DomainError("replacement covariates have the wrong row count");
  return Dataset(std::move(z), u_, v_, kind_);
}

Dataset Dataset::concat(const Dataset& a, const Dataset& b) {
  if (a.dim() != b.dim()) throw DomainError("cannot concatenate datasets of different dimension");
  Matrix z(a.z_.rows() + b.z_.rows(), a.z_.cols());
  z << a.z_, b.z_;
  auto u = a.u_;
  u.insert(u.end(), b.u_.begin(), b.u_.end());
  auto v = a.v_;
  v.insert(v.end(), b.v_.begin(), b.v_.end());
  auto kind = a.kind_;
  kind.insert(kind.end(), b.kind_.begin(), b.kind_.end());
  return Dataset(std::move(z), std::move(u), std::move(v), std::move(kind));
}

StepCumulativeHazard::StepCumulativeHazard(std::vector<double> t, std::vector<double> v)
    : times(std::move(t)), values(std::move(v)) {
  if (times.size() != values.size()) throw DomainError("step function times/values length mismatch");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || !std::isfinite(values[k])) throw DomainError("step function entries must be finite");
    if (k > 0 && !(times[k - 1] < times[k])) throw DomainError("step function times must be strictly increasing");
    if (k > 0 && values[k - 1] > values[k]) throw DomainError("cumulative hazard values must be nondecreasing");
  }
  if (!values.empty() && values.front() < 0.0) throw DomainError("cumulative hazard must be nonnegative");
}

double StepCumulativeHazard::operator()(double t) const {
  if (!(t >= 0.0)) throw DomainError("cumulative hazard evaluated at negative or NaN time");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0.0;
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

GompertzBaseline::GompertzBaseline(double gamma_, double lam_) : gamma(gamma_), lam(lam_) {
  if (!(gamma > 0.0) || !(lam > 0.0) || !std::isfinite(gamma) || !std::isfinite(lam)) {
    throw DomainError("Gompertz baseline needs gamma > 0 and lam > 0");
  }
}

double GompertzBaseline::cumhaz(double t) const {
  if (!(t >= 0.0)) throw DomainError("Gompertz cumulative hazard evaluated at negative time");
  return lam / gamma * std::expm1(gamma * t);
}

double GompertzBaseline::inverse_cumhaz(double h) const {
  if (!(h >= 0.0)) throw DomainError("inverse cumulative hazard needs h >= 0");
  return std::log1p(gamma * h / lam) / gamma;
}

double eval_cumhaz(const StepCumulativeHazard& h, double t) { return h(t); }

double gompertz_cumhaz(const GompertzBaseline& b, double t) {
  return GompertzBaseline(b.gamma, b.lam).cumhaz(t);
}

double survival(double cumhaz_at_t, double risk) {
  if (!(cumhaz_at_t >= 0.0)) throw DomainError("survival needs a nonnegative cumulative hazard");
  if (!std::isfinite(risk)) throw DomainError("survival needs a finite risk score");
  return std::exp(-cumhaz_at_t * std::exp(risk));
}

SampleTerm sample_term(Censoring kind, double lu, double lv, double risk) {
  SampleTerm t;
  const double e = std::exp(risk);
  switch (kind) {
    case Censoring::Left: {
      const double x = lu * e;
      if (!(x > 0.0)) {
        t.value = kLogFloor;
        t.floored = true;
        break;
      }
      const double q = 1.0 / std::expm1(x);
      t.value = std::log(-std::expm1(-x));
      t.d_lu = e * q;
      t.d_risk = x * q;
      t.c_lu = e * e * curvature_factor(x);
      break;
    }
    case Censoring::Interval: {
      const double a = lu * e;
      const double gap = (lv - lu) * e;
      if (!(gap > 0.0)) {
        t.value = kLogFloor;
        t.floored = true;
        break;
      }
      const double q = 1.0 / std::expm1(gap);
      t.value = -a + std::log(-std::expm1(-gap));
      t.d_lu = -e - e * q;
      t.d_lv = e * q;
      t.d_risk = -a + gap * q;
      t.c_lu = t.c_lv = e * e * curvature_factor(gap);
      break;
    }
    case Censoring::Right: {
      const double b = lv * e;
      t.value = -b;
      t.d_lv = -e;
      t.d_risk = -b;
      break;
    }
  }
  return t;
}

LogLikelihood loglik(const Dataset& data, std::span<const double> risks,
                     std::span<const double> lu, std::span<const double> lv) {
  const auto n = data.size();
  if (risks.size() != n || lu.size() != n || lv.size() != n) {
    throw DomainError("loglik: risks/LU/LV lengths must equal the sample count");
  }
  detail::CompensatedSum sum;
  LogLikelihood out;
  const auto& kind = data.kind();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(risks[i])) throw DomainError("loglik: non-finite risk at sample " + std::to_string(i));
    const bool uses_u = kind[i] != Censoring::Right;
    const bool uses_v = kind[i] != Censoring::Left;
    if ((uses_u && !(lu[i] >= 0.0)) || (uses_v && !(lv[i] >= 0.0))) {
      throw DomainError("loglik: negative cumulative hazard at sample " + std::to_string(i));
    }
    if (kind[i] == Censoring::Interval && lu[i] > lv[i]) {
      throw DomainError("loglik: LU > LV for interval-censored sample " + std::to_string(i));
    }
    const auto term = sample_term(kind[i], lu[i], lv[i], risks[i]);
    if (term.floored) ++out.floored;
    sum.add(term.value);
  }
  out.value = sum.value();
  return out;
}

Standardization Standardization::fit(const Dataset& data) {
  Standardization s;
  const auto& z = data.covariates();
  const auto n = static_cast<double>(z.rows());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double m = z.col(j).mean();
    double sd = 1.0;
    if (z.rows() > 1) {
      sd = std::sqrt((z.col(j).array() - m).square().sum() / (n - 1.0));
      if (!(sd > 1e-12)) sd = 1.0;
    }
    s.mean.push_back(m);
    s.sd.push_back(sd);
  }
  return s;
}

Standardization Standardization::identity(int d) {
  Standardization s;
  s.mean.assign(static_cast<std::size_t>(d), 0.0);
  s.sd.assign(static_cast<std::size_t>(d), 1.0);
  return s;
}

Dataset Standardization::apply(const Dataset& data) const {
  if (data.dim() != dim()) throw DomainError("standardization dimension mismatch");
  Dataset::Matrix z = data.covariates();
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    z.col(j) = (z.col(j).array() - mean[k]) / sd[k];
  }
  return data.with_covariates(std::move(z));
}

std::vector<double> Standardization::apply(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != dim()) throw DomainError("standardization dimension mismatch");
  std::vector<double> out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = (z[j] - mean[j]) / sd[j];
  return out;
}

}  // namespace icnet
