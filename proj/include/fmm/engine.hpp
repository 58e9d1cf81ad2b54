#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fmm/dataset.hpp"
#include "fmm/oracle.hpp"
#include "fmm/scheduler.hpp"
#include "fmm/tree.hpp"

namespace fmm {

struct RunConfig {
  std::int64_t n_bodies = 10000;
  int order = 6;
  std::size_t queue_threshold = 0;  // 0 -> max(n_bodies/100, 64)
  int threads = 1;
  Real theta = 0.5;
  int n_crit = 64;
  bool mutual = false;
  BodyDistribution distribution = BodyDistribution::cube;
  std::uint64_t seed = 1;
  bool check = false;
  Real check_tol = 1e-2;
  std::string trace_path;
  std::string dag_path;
  std::string csv_path;

  std::size_t effective_queue_threshold() const {
    if (queue_threshold > 0) return queue_threshold;
    return static_cast<std::size_t>(std::max<std::int64_t>(n_bodies / 100, 64));
  }
};

struct RunResult {
  double t_build = 0.0;
  double t_upward = 0.0;
  double t_traversal = 0.0;  // traversal + task insertion + wait_all
  double t_downward = 0.0;
  std::size_t task_count = 0;
  std::optional<ErrorReport> error;
  double speedup = 0.0;     // filled by run_sweep
  double efficiency = 0.0;  // filled by run_sweep

  double t_total() const { return t_build + t_upward + t_traversal + t_downward; }
};

/// Executes build -> upward -> scheduled interaction -> downward, then the
/// optional direct-sum check and the requested exports. The returned tree
/// holds the reordered bodies with accumulated potentials.
RunResult run_once(const RunConfig& cfg, Tree* tree_out = nullptr);

struct SweepRanges {
  std::vector<std::int64_t> n_bodies;
  std::vector<int> orders;
  std::vector<std::size_t> queue_thresholds;
  std::vector<int> threads;
};

struct SweepRow {
  RunConfig config;
  RunResult result;
};

/// Cartesian sweep over (p, N, Q, T). Speedup/efficiency are relative to the
/// T=1 run of the same (p, N, Q), computed lazily when T=1 is not in the
/// requested range. Writes one CSV row per run to `csv` when non-null.
std::vector<SweepRow> run_sweep(const RunConfig& base, const SweepRanges& ranges,
                                std::ostream* csv);

/// Fixed CSV headers.
std::string run_csv_header();
std::string run_csv_row(const RunConfig& cfg, const RunResult& res);
std::string sweep_csv_header();
std::string sweep_csv_row(const RunConfig& cfg, const RunResult& res);

}  // namespace fmm
