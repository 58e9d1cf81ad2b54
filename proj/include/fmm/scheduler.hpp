#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace fmm {

/// How a task uses one of its arguments. `value` arguments are captured at
/// insertion and never create dependencies; `nodep` opts a handle out of
/// hazard analysis; `output` is ordered like a write (accumulation targets
/// need serialized writers even when the prior value is overwritten).
enum class Access : std::uint8_t { value, input, output, inout, nodep };

inline bool is_write(Access a) { return a == Access::output || a == Access::inout; }
inline bool is_read(Access a) { return a == Access::input || a == Access::inout; }

using DataHandle = std::uint64_t;
using TaskId = std::uint64_t;

struct TaskArg {
  DataHandle handle = 0;
  Access mode = Access::value;
  bool locality = false;  // prefer the worker that last touched this handle
};

enum class TaskState : std::uint8_t { not_ready, queued, done };

struct SchedulerConfig {
  int num_workers = 1;
  std::size_t window_size = 0;  // 0 -> 40 * num_workers
  bool trace_enabled = false;
  bool dag_capture = false;
};

/// Post-run view of a task for tooling and audits.
struct TaskInfo {
  TaskId id = 0;
  std::string name;
  std::vector<TaskArg> args;
  TaskState state = TaskState::not_ready;
  int worker = -1;  // 0..num_workers-1; num_workers denotes the master thread
  std::int64_t start_ns = 0;
  std::int64_t end_ns = 0;
  std::vector<TaskId> predecessors;  // captured only with dag_capture
};

/// Dependency-driven task runtime: the implicit DAG is inferred from the
/// sequential insertion order and the access modes of task arguments (RAW,
/// WAR, WAW hazards). Tasks move NotReady -> Queued -> Done; worker threads
/// execute queued tasks with per-worker deques and work stealing (LIFO local,
/// FIFO steal). At most `window_size` tasks are pending at any time: when the
/// window is full, insertion blocks and the master executes tasks itself.
class Scheduler {
 public:
  explicit Scheduler(SchedulerConfig config = {});
  ~Scheduler();
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  /// Master thread only. Blocks while the task window is full. Returns the
  /// task id (insertion order defines a valid topological order of the DAG).
  TaskId insert_task(std::string name, std::function<void()> kernel,
                     std::vector<TaskArg> args);

  /// Master thread only. Executes/waits until every inserted task is done;
  /// rethrows the first task error (with its task id) if any kernel failed.
  void wait_all();

  /// Stops the workers; further insertions are rejected. Idempotent.
  void shutdown();

  /// Writes the captured dependency graph in DOT format (requires dag_capture).
  void export_dag(const std::string& path) const;
  /// Writes one CSV row task_id,worker_id,kind,start_ns,end_ns per executed
  /// task (requires trace_enabled).
  void export_trace(const std::string& path) const;

  std::size_t task_count() const;
  std::size_t window_high_water() const;
  const SchedulerConfig& config() const { return config_; }
  /// Snapshot of all tasks; call after wait_all.
  std::vector<TaskInfo> tasks() const;

 private:
  struct Task {
    std::string name;
    std::function<void()> kernel;
    std::vector<TaskArg> args;
    TaskState state = TaskState::not_ready;
    int unresolved = 0;
    int worker = -1;
    std::int64_t start_ns = 0;
    std::int64_t end_ns = 0;
    std::vector<TaskId> successors;
    std::vector<TaskId> predecessors;
  };
  struct HandleState {
    bool has_writer = false;
    TaskId last_writer = 0;
    std::vector<TaskId> readers_since_write;
    int locality_worker = -1;
  };

  void worker_loop(int worker_id);
  bool try_pop(int worker_id, TaskId& out);         // locked
  void enqueue_ready(TaskId id);                    // locked
  void execute(std::unique_lock<std::mutex>& lock, TaskId id, int worker_id);
  void complete(TaskId id, int worker_id);          // locked
  void require_master(const char* op) const;

  SchedulerConfig config_;
  mutable std::mutex mu_;
  std::condition_variable cv_ready_;  // workers: work may be available
  std::condition_variable cv_done_;   // master: a task completed
  std::deque<Task> tasks_;
  std::unordered_map<DataHandle, HandleState> handles_;
  std::deque<TaskId> master_queue_;
  std::vector<std::deque<TaskId>> worker_queues_;
  std::vector<std::thread> workers_;
  std::size_t pending_ = 0;
  std::size_t high_water_ = 0;
  std::size_t running_ = 0;
  bool stop_ = false;
  bool shutdown_ = false;
  bool aborted_ = false;
  TaskId error_task_ = 0;
  std::string error_message_;
  std::thread::id master_thread_;
  std::chrono::steady_clock::time_point epoch_;
};

}  // namespace fmm
