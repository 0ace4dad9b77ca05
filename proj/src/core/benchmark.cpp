#include "icnet/benchmark.hpp"

#include "icnet/errors.hpp"
#include "icnet/io.hpp"
#include "icnet/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

namespace icnet {

void BenchmarkConfig::validate() const {
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  if (n_values.empty()) throw ConfigError("at least one sample size is required");
  for (auto n : n_values) {
    if (n < 10) throw ConfigError("benchmark sample sizes must be >= 10");
  }
  if (d < 4) throw ConfigError("benchmark dimension must be >= 4");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (l2_grid_n < 2) throw ConfigError("L2 grid needs at least two points");
  fit.validate();
  path.validate();
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t base, std::size_t n, int replicate) {
  return splitmix64(splitmix64(splitmix64(base) ^ n) ^ static_cast<std::uint64_t>(replicate));
}

int default_thread_count() {
  if (const char* env = std::getenv("ICNET_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ReplicateResult run_replicate(const BenchmarkConfig& cfg, std::size_t n, int replicate) {
  const auto start = std::chrono::steady_clock::now();
  ReplicateResult r;
  r.n = n;
  r.replicate = replicate;
  r.seed = replicate_seed(cfg.seed, n, replicate);

  SimConfig sc;
  sc.n = n;
  sc.d = cfg.d;
  sc.model = cfg.model;
  sc.seed = r.seed;
  const auto study = simulate_study(sc);

  FitConfig fc = cfg.fit;
  fc.seed = r.seed;
  const auto path = fit_path(study.data, fc, cfg.path);
  const auto& best = path.best();
  r.lambda = path.lambdas[path.best_index];
  r.n_active = path.n_active[path.best_index];
  r.ibs = path.val_ibs[path.best_index];

  const std::vector<double> origin(static_cast<std::size_t>(cfg.d), 0.0);
  r.l2 = l2_hazard_error(predict_cumhaz(best, origin), study.truth.baseline, path.t1, path.t2, cfg.l2_grid_n);

  const Eigen::VectorXd pred = best.net.forward(best.standardization.apply(study.data).covariates());
  r.r2 = r2_risk_or_nan({pred.data(), static_cast<std::size_t>(pred.size())}, study.truth.risk);

  const auto rates = selection_tp_tn(best.selected_features, study.truth.support, cfg.d);
  r.tp = rates.tp;
  r.tn = rates.tn;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<ReplicateResult> run_benchmark(const BenchmarkConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<std::size_t, int>> jobs;
  for (auto n : cfg.n_values) {
    for (int rep = 0; rep < cfg.replicates; ++rep) jobs.emplace_back(n, rep);
  }
  std::vector<ReplicateResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (failure) return;
      }
      try {
        results[k] = run_replicate(cfg, jobs[k].first, jobs[k].second);
        std::lock_guard<std::mutex> lock(mu);
        if (cfg.on_done) cfg.on_done(results[k]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), jobs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

const std::vector<std::string>& benchmark_metric_names() {
  static const std::vector<std::string> names{"ibs", "l2", "r2", "tp", "tn", "n_active", "lambda"};
  return names;
}

double metric_value(const ReplicateResult& r, const std::string& metric) {
  if (metric == "ibs") return r.ibs;
  if (metric == "l2") return r.l2;
  if (metric == "r2") return r.r2;
  if (metric == "tp") return r.tp;
  if (metric == "tn") return r.tn;
  if (metric == "n_active") return r.n_active;
  if (metric == "lambda") return r.lambda;
  throw DomainError("unknown benchmark metric '" + metric + "'");
}

std::vector<MetricSummary> summarize(const std::vector<ReplicateResult>& results) {
  std::map<std::size_t, std::vector<const ReplicateResult*>> by_n;
  for (const auto& r : results) by_n[r.n].push_back(&r);
  std::vector<MetricSummary> out;
  for (const auto& [n, group] : by_n) {
    for (const auto& metric : benchmark_metric_names()) {
      MetricSummary s;
      s.n = n;
      s.metric = metric;
      double sum = 0.0;
      for (const auto* r : group) {
        const double x = metric_value(*r, metric);
        if (!std::isfinite(x)) continue;
        sum += x;
        ++s.count;
      }
      if (s.count == 0) {
        s.mean = s.sd = std::numeric_limits<double>::quiet_NaN();
      } else {
        s.mean = sum / s.count;
        double ss = 0.0;
        for (const auto* r : group) {
          const double x = metric_value(*r, metric);
          if (std::isfinite(x)) ss += (x - s.mean) * (x - s.mean);
        }
        s.sd = s.count > 1 ? std::sqrt(ss / (s.count - 1)) : 0.0;
      }
      out.push_back(s);
    }
  }
  return out;
}

void write_results_csv(std::ostream& out, const BenchmarkConfig& cfg, const std::vector<ReplicateResult>& results) {
  const std::string model = to_string(cfg.model);
  out << "# icnet results format_version=" << kFormatVersion << "\n";
  out << "row,model,n,replicate,seed,metric,value\n";
  for (const auto& r : results) {
    for (const auto& metric : benchmark_metric_names()) {
      out << "replicate," << model << ',' << r.n << ',' << r.replicate << ',' << r.seed << ',' << metric << ','
          << format_double(metric_value(r, metric)) << '\n';
    }
  }
  for (const auto& s : summarize(results)) {
    out << "mean," << model << ',' << s.n << ",," << cfg.seed << ',' << s.metric << ',' << format_double(s.mean) << '\n';
    out << "sd," << model << ',' << s.n << ",," << cfg.seed << ',' << s.metric << ',' << format_double(s.sd) << '\n';
  }
}

}  // namespace icnet
