#include "fmm/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fmm/traversal.hpp"

namespace fmm {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Ships the drained queue as one super-task per pair. Write handles are the
// pairs' cells normalized to the shallowest level present in the batch:
// subtrees of distinct same-level cells are disjoint, so handle equality is
// exactly write-footprint overlap and the scheduler's hazard analysis
// serializes every conflicting pair (and nothing else).
void ship_super_tasks(Scheduler& sched, Tree& tree, const TraversalConfig& cfg,
                      const KernelVisitor& visitor, std::span<const TraversalPair> pairs) {
  int frontier = kMaxTreeLevel;
  for (const TraversalPair& pr : pairs) {
    frontier = std::min(frontier, tree.cells[pr.target].level);
    if (cfg.mutual) frontier = std::min(frontier, tree.cells[pr.source].level);
  }
  for (const TraversalPair& pr : pairs) {
    const DataHandle target_handle =
        static_cast<DataHandle>(tree.ancestor_at_level(pr.target, frontier));
    std::vector<TaskArg> args;
    if (cfg.mutual) {
      const DataHandle source_handle =
          static_cast<DataHandle>(tree.ancestor_at_level(pr.source, frontier));
      args.push_back({target_handle, Access::inout, false});
      if (source_handle != target_handle) {
        args.push_back({source_handle, Access::inout, false});
      }
    } else {
      args.push_back({target_handle, Access::output, true});
      args.push_back({static_cast<DataHandle>(pr.source), Access::nodep, false});
    }
    sched.insert_task(
        "interact",
        [&tree, cfg, visitor, pr] {
          KernelVisitor v = visitor;
          traverse_pair(tree, tree, pr, cfg, v);
        },
        std::move(args));
  }
}

}  // namespace

RunResult run_once(const RunConfig& cfg, Tree* tree_out) {
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0)) {
    throw std::invalid_argument("theta must be in (0,1)");
  }
  RunResult res;

  std::vector<Body> bodies = generate_bodies(cfg.distribution, cfg.n_bodies, cfg.seed);

  auto t0 = Clock::now();
  Tree tree = build_tree(std::move(bodies), cfg.n_crit, cfg.order);
  res.t_build = seconds_since(t0);

  const KernelTables tables(cfg.order);

  t0 = Clock::now();
  upward_pass(tree, tables);
  res.t_upward = seconds_since(t0);

  {
    SchedulerConfig sc;
    sc.num_workers = cfg.threads;
    sc.trace_enabled = !cfg.trace_path.empty();
    sc.dag_capture = !cfg.dag_path.empty();
    Scheduler sched(sc);

    TraversalConfig tc;
    tc.theta = cfg.theta;
    tc.queue_threshold = cfg.effective_queue_threshold();
    tc.mutual = cfg.mutual;
    KernelVisitor visitor(tree, tree, tables, cfg.mutual);

    t0 = Clock::now();
    dual_tree_traverse(tree, tree, tc, visitor, [&](std::span<const TraversalPair> pairs) {
      ship_super_tasks(sched, tree, tc, visitor, pairs);
    });
    sched.wait_all();
    res.t_traversal = seconds_since(t0);
    res.task_count = sched.task_count();

    if (!cfg.trace_path.empty()) sched.export_trace(cfg.trace_path);
    if (!cfg.dag_path.empty()) sched.export_dag(cfg.dag_path);
  }

  t0 = Clock::now();
  downward_pass(tree, tables);
  res.t_downward = seconds_since(t0);

  if (cfg.check) {
    const std::vector<Real> reference = direct_sum(tree.bodies);
    const std::vector<Real> computed = potentials(tree);
    res.error = compare(computed, reference);
  }

  if (!cfg.csv_path.empty()) {
    const bool fresh = !std::filesystem::exists(cfg.csv_path) ||
                       std::filesystem::file_size(cfg.csv_path) == 0;
    std::ofstream out(cfg.csv_path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open " + cfg.csv_path);
    if (fresh) out << run_csv_header() << '\n';
    out << run_csv_row(cfg, res) << '\n';
  }

  if (tree_out != nullptr) *tree_out = std::move(tree);
  return res;
}

std::string run_csv_header() {
  return "n,p,q,threads,theta,ncrit,mutual,dist,seed,"
         "t_build,t_upward,t_traversal,t_downward,t_total,tasks,rel_l2,rel_linf";
}

namespace {

void append_config(std::ostringstream& out, const RunConfig& cfg) {
  out << cfg.n_bodies << ',' << cfg.order << ',' << cfg.effective_queue_threshold() << ','
      << cfg.threads << ',' << cfg.theta << ',' << cfg.n_crit << ',' << (cfg.mutual ? 1 : 0)
      << ',' << distribution_name(cfg.distribution) << ',' << cfg.seed;
}

}  // namespace

std::string run_csv_row(const RunConfig& cfg, const RunResult& res) {
  std::ostringstream out;
  out.precision(9);
  append_config(out, cfg);
  out << ',' << res.t_build << ',' << res.t_upward << ',' << res.t_traversal << ','
      << res.t_downward << ',' << res.t_total() << ',' << res.task_count << ',';
  if (res.error) {
    out << res.error->rel_l2 << ',' << res.error->rel_linf;
  } else {
    out << ',';
  }
  return out.str();
}

std::string sweep_csv_header() {
  return "n,p,q,threads,theta,ncrit,mutual,dist,seed,time_total,speedup_vs_T1,efficiency";
}

std::string sweep_csv_row(const RunConfig& cfg, const RunResult& res) {
  std::ostringstream out;
  out.precision(9);
  append_config(out, cfg);
  out << ',' << res.t_total() << ',' << res.speedup << ',' << res.efficiency;
  return out.str();
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const SweepRanges& ranges,
                                std::ostream* csv) {
  auto or_default = [](auto range, auto fallback) {
    if (range.empty()) range.push_back(fallback);
    return range;
  };
  const auto ns = or_default(ranges.n_bodies, base.n_bodies);
  const auto ps = or_default(ranges.orders, base.order);
  const auto qs = or_default(ranges.queue_thresholds, base.effective_queue_threshold());
  const auto ts = or_default(ranges.threads, base.threads);

  if (csv != nullptr) *csv << sweep_csv_header() << '\n';

  std::vector<SweepRow> rows;
  std::map<std::tuple<int, std::int64_t, std::size_t>, double> t1_times;
  auto baseline = [&](const RunConfig& cfg) -> double {
    const auto key = std::make_tuple(cfg.order, cfg.n_bodies, cfg.queue_threshold);
    auto it = t1_times.find(key);
    if (it != t1_times.end()) return it->second;
    RunConfig c1 = cfg;
    c1.threads = 1;
    const RunResult r1 = run_once(c1);
    t1_times[key] = r1.t_total();
    return r1.t_total();
  };

  for (int p : ps) {
    for (std::int64_t n : ns) {
      for (std::size_t q : qs) {
        for (int t : ts) {
          RunConfig cfg = base;
          cfg.order = p;
          cfg.n_bodies = n;
          cfg.queue_threshold = q;
          cfg.threads = t;
          cfg.trace_path.clear();
          cfg.dag_path.clear();
          cfg.csv_path.clear();
          RunResult res = run_once(cfg);
          if (t == 1) {
            t1_times[std::make_tuple(p, n, q)] = res.t_total();
          }
          const double t1 = baseline(cfg);
          res.speedup = res.t_total() > 0 ? t1 / res.t_total() : 0.0;
          res.efficiency = res.speedup / t;
          if (res.efficiency > 1.1) {
            std::fprintf(stderr,
                         "warning: efficiency %.3f > 1.1 at n=%lld p=%d q=%zu t=%d "
                         "(timing noise or baseline anomaly)\n",
                         res.efficiency, static_cast<long long>(cfg.n_bodies), cfg.order,
                         cfg.queue_threshold, t);
          }
          if (csv != nullptr) *csv << sweep_csv_row(cfg, res) << '\n';
          rows.push_back({cfg, res});
        }
      }
    }
  }
  return rows;
}

}  // namespace fmm
