#pragma once

// Synthetic interval-censored data: AR(1)-correlated Gaussian covariates,
// sparse linear (m1) and nonlinear (m2) true risks, Gompertz event times
// drawn by inversion, and random-inspection interval censoring.

#include "icnet/survival.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace icnet {

enum class RiskModel { M1, M2 };

std::string to_string(RiskModel m);
RiskModel risk_model_from_string(const std::string& s);

struct InspectionScheme {
  int count = 10;
  double tau = 0.0;  // <= 0 selects the pilot 0.95 event-time quantile
};

struct SimConfig {
  std::size_t n = 500;
  int d = 100;
  RiskModel model = RiskModel::M1;
  GompertzBaseline baseline{5.0, 1.0};
  InspectionScheme inspections;
  std::uint64_t seed = 1;
};

using Rng = std::mt19937_64;

// Covariance 0.5^|i-j|.
Eigen::MatrixXd ar1_covariance(int d, double rho = 0.5);

Dataset::Matrix gen_covariates(std::size_t n, int d, Rng& rng);
Dataset::Matrix gen_covariates(std::size_t n, int d, std::uint64_t seed);

double true_risk(RiskModel model, std::span<const double> z);

// Inversion of Lambda(t) e^m = e for a unit exponential draw e.
double event_time_from_exponential(double e, double m, const GompertzBaseline& b);
double gen_event_time(std::span<const double> z, RiskModel model, const GompertzBaseline& b, Rng& rng);

struct CensoredObservation {
  double u = 0.0;
  double v = 0.0;
  int delta1 = 0;
  int delta2 = 0;
};

// Censoring from an explicit sorted list of inspection times.
CensoredObservation censor_with_inspections(double t_event, std::span<const double> sorted_inspections);
CensoredObservation gen_censoring(double t_event, const InspectionScheme& scheme, Rng& rng);

// 0.95 quantile of the marginal event time, from a fixed-seed pilot sample.
double pilot_inspection_horizon(RiskModel model, int d, const GompertzBaseline& b);

struct SimTruth {
  RiskModel model = RiskModel::M1;
  std::vector<double> risk;  // m(z_i)
  std::vector<int> support;  // zero-based feature indices
  GompertzBaseline baseline;
  double tau = 0.0;
  std::vector<double> event_time;
};

struct SimStudy {
  Dataset data;
  SimTruth truth;
};

SimStudy simulate_study(const SimConfig& cfg);

}  // namespace icnet
