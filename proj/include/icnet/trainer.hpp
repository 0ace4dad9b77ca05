#pragma once

// Alternating fit of the sparse residual risk network and the baseline
// cumulative hazard, the warm-started regularisation path, and prediction.

#include "icnet/isotonic.hpp"
#include "icnet/metrics.hpp"
#include "icnet/risknet.hpp"
#include "icnet/survival.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace icnet {

struct FitConfig {
  int epochs = 50;       // proximal-gradient epochs between baseline updates
  int outer_iters = 20;  // baseline (ICM) updates
  double learning_rate = 1e-2;
  double hierarchy_M = 10.0;
  double penalty_lambda = 0.0;
  NetConfig net;
  IcmConfig icm;
  std::uint64_t seed = 0;  // network initialisation and data splits
  bool standardize = true;
  double objective_tol = 1e-8;  // early exit on penalised objective change

  void validate() const;
};

struct FitDiagnostics {
  // Per outer iteration: log-likelihood before and after the baseline update,
  // and the penalised objective -l_n/n + lambda ||theta||_1 after it.
  std::vector<double> loglik_before_icm;
  std::vector<double> loglik_after_icm;
  std::vector<double> objective;
  // Largest max_i |W_ij| - M |theta_j| seen after any epoch.
  double max_hierarchy_violation = 0.0;
  // Largest lambda needed for HIER-PROX to zero every feature at some epoch.
  double max_full_shrinkage_lambda = 0.0;
  int epochs_run = 0;
  bool boundary = false;
  bool identifiable = true;  // false when every sample is right-censored
};

struct FittedModel {
  ResidualRiskNet net;
  StepCumulativeHazard baseline;  // cumulative hazard at standardized z = 0
  Standardization standardization;
  double final_loglik = 0.0;
  std::vector<int> selected_features;  // j with theta_j != 0
  double hierarchy_M = 10.0;
  double penalty_lambda = 0.0;
  FitDiagnostics diagnostics;

  int dim() const { return net.input_dim(); }
};

FittedModel fit(const Dataset& data, const FitConfig& cfg);

// Warm-started fit on already standardized data over a fixed grid.
FittedModel fit_standardized(const Dataset& data, const TimeGrid& grid, const FitConfig& cfg,
                             const Standardization& transform, const FittedModel* warm);

std::vector<int> active_features(const ResidualRiskNet& net);

double predict_risk(const FittedModel& model, std::span<const double> z);
std::vector<double> predict_survival(const FittedModel& model, std::span<const double> z,
                                     std::span<const double> times);
// Cumulative hazard curve of a subject with raw covariates z.
StepCumulativeHazard predict_cumhaz(const FittedModel& model, std::span<const double> z);

// Integrated Brier score of a model on raw test data.
struct IbsEvaluation {
  double value = 0.0;
  std::vector<double> times;
  std::vector<double> brier;
  std::size_t dropped = 0;
};
IbsEvaluation evaluate_ibs(const FittedModel& model, const Dataset& test, const StepSurvivalEstimate& g,
                           const BrierConfig& cfg);

struct PathConfig {
  double lambda_start = 0.0;         // <= 0: chosen by bisection
  double lambda_start_factor = 1.0;  // multiplies the chosen start
  double multiplier = 1.05;
  double val_fraction = 0.2;
  int max_path_length = 500;
  double dense_active_fraction = 0.95;
  int bisection_steps = 8;
  IbsWeighting weighting = IbsWeighting::Paper;
  int ibs_grid_n = 100;

  void validate() const;
};

struct PathResult {
  std::vector<double> lambdas;
  std::vector<FittedModel> models;
  std::vector<double> val_ibs;
  std::vector<double> train_loglik;
  std::vector<int> n_active;
  std::size_t best_index = 0;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> val_rows;
  double t1 = 0.0;
  double t2 = 0.0;

  const FittedModel& best() const { return models.at(best_index); }
};

// Split stratified by censoring type; returns (train, validation) row indices.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(const Dataset& data, double val_fraction,
                                                                             std::uint64_t seed);

PathResult fit_path(const Dataset& data, const FitConfig& cfg, const PathConfig& path);

}  // namespace icnet
