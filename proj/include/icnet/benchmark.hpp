#pragma once

// Replicated simulation studies: simulate, run the regularisation path, and
// score the selected model against the known truth.

#include "icnet/simgen.hpp"
#include "icnet/trainer.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace icnet {

struct ReplicateResult {
  std::size_t n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  int n_active = 0;
  double ibs = 0.0;  // validation IBS of the selected model
  double l2 = 0.0;   // baseline cumulative hazard error over [t1, t2]
  double r2 = 0.0;
  double tp = 0.0;
  double tn = 0.0;
  double seconds = 0.0;
};

struct BenchmarkConfig {
  RiskModel model = RiskModel::M1;
  std::vector<std::size_t> n_values{500};
  int replicates = 30;
  std::uint64_t seed = 1;
  int d = 100;
  int threads = 1;
  int l2_grid_n = 200;
  FitConfig fit;
  PathConfig path;
  // Called after each replicate, serialised across workers.
  std::function<void(const ReplicateResult&)> on_done;

  void validate() const;
};

// Seed of one replicate, mixed from the base seed, n and the replicate index.
std::uint64_t replicate_seed(std::uint64_t base, std::size_t n, int replicate);

// ICNET_THREADS if set and positive, else the hardware concurrency.
int default_thread_count();

ReplicateResult run_replicate(const BenchmarkConfig& cfg, std::size_t n, int replicate);

// Results ordered by (n, replicate) regardless of the thread count.
std::vector<ReplicateResult> run_benchmark(const BenchmarkConfig& cfg);

struct MetricSummary {
  std::size_t n = 0;
  std::string metric;
  int count = 0;  // finite values averaged
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single value
};

const std::vector<std::string>& benchmark_metric_names();
double metric_value(const ReplicateResult& r, const std::string& metric);

std::vector<MetricSummary> summarize(const std::vector<ReplicateResult>& results);

// Long format: one row per replicate and metric, then mean and sd rows.
void write_results_csv(std::ostream& out, const BenchmarkConfig& cfg, const std::vector<ReplicateResult>& results);

}  // namespace icnet
