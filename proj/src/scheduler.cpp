#include "fmm/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <stdexcept>

namespace fmm {
namespace {

std::int64_t now_ns(std::chrono::steady_clock::time_point epoch) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now() - epoch)
      .count();
}

}  // namespace

Scheduler::Scheduler(SchedulerConfig config) : config_(config) {
  if (config_.num_workers < 1) throw std::invalid_argument("num_workers must be >= 1");
  if (config_.window_size == 0) config_.window_size = 40 * static_cast<std::size_t>(config_.num_workers);
  master_thread_ = std::this_thread::get_id();
  epoch_ = std::chrono::steady_clock::now();
  worker_queues_.resize(config_.num_workers);
  workers_.reserve(config_.num_workers);
  for (int w = 0; w < config_.num_workers; ++w) {
    workers_.emplace_back([this, w] { worker_loop(w); });
  }
}

Scheduler::~Scheduler() { shutdown(); }

void Scheduler::shutdown() {
  {
    std::unique_lock lock(mu_);
    if (shutdown_ && stop_) return;
    shutdown_ = true;
    stop_ = true;
  }
  cv_ready_.notify_all();
  cv_done_.notify_all();
  for (std::thread& t : workers_) {
    if (t.joinable()) t.join();
  }
  workers_.clear();
}

void Scheduler::require_master(const char* op) const {
  if (std::this_thread::get_id() != master_thread_) {
    throw std::logic_error(std::string(op) + " must be called from the master thread");
  }
}

TaskId Scheduler::insert_task(std::string name, std::function<void()> kernel,
                              std::vector<TaskArg> args) {
  require_master("insert_task");
  std::unique_lock lock(mu_);
  if (shutdown_) throw std::runtime_error("insert_task after shutdown");
  if (aborted_) throw std::runtime_error("task " + std::to_string(error_task_) +
                                         " failed: " + error_message_);

  // Window: block (and help execute) until a slot frees up.
  while (pending_ >= config_.window_size) {
    TaskId ready;
    if (try_pop(config_.num_workers, ready)) {
      execute(lock, ready, config_.num_workers);
    } else {
      cv_done_.wait(lock);
    }
    if (aborted_) throw std::runtime_error("task " + std::to_string(error_task_) +
                                           " failed: " + error_message_);
  }

  const TaskId id = tasks_.size();
  tasks_.push_back({});
  Task& task = tasks_.back();
  task.name = std::move(name);
  task.kernel = std::move(kernel);
  task.args = std::move(args);

  // Hazard analysis against the per-handle access history.
  std::vector<TaskId> preds;
  auto add_pred = [&](TaskId p) {
    if (p == id) return;
    if (std::find(preds.begin(), preds.end(), p) == preds.end()) preds.push_back(p);
  };
  for (const TaskArg& arg : task.args) {
    if (arg.mode == Access::value || arg.mode == Access::nodep) continue;
    HandleState& hs = handles_[arg.handle];
    if (is_read(arg.mode) && hs.has_writer) add_pred(hs.last_writer);  // RAW
    if (is_write(arg.mode)) {
      if (hs.has_writer) add_pred(hs.last_writer);                     // WAW
      for (TaskId r : hs.readers_since_write) add_pred(r);             // WAR
    }
  }
  // Update the histories only after scanning all args, so a task that names
  // the same handle twice does not see itself as a predecessor.
  for (const TaskArg& arg : task.args) {
    if (arg.mode == Access::value || arg.mode == Access::nodep) continue;
    HandleState& hs = handles_[arg.handle];
    if (is_write(arg.mode)) {
      hs.has_writer = true;
      hs.last_writer = id;
      hs.readers_since_write.clear();
    } else if (is_read(arg.mode)) {
      hs.readers_since_write.push_back(id);
    }
  }

  for (TaskId p : preds) {
    if (tasks_[p].state != TaskState::done) {
      tasks_[p].successors.push_back(id);
      ++task.unresolved;
    }
  }
  if (config_.dag_capture) task.predecessors = std::move(preds);

  ++pending_;
  high_water_ = std::max(high_water_, pending_);
  if (task.unresolved == 0) {
    task.state = TaskState::queued;
    enqueue_ready(id);
    cv_ready_.notify_one();
  }
  return id;
}

void Scheduler::enqueue_ready(TaskId id) {
  const Task& task = tasks_[id];
  int target = -1;
  for (const TaskArg& arg : task.args) {
    if (!arg.locality || arg.mode == Access::value) continue;
    auto it = handles_.find(arg.handle);
    if (it != handles_.end() && it->second.locality_worker >= 0) {
      target = it->second.locality_worker;
      break;
    }
  }
  if (target >= 0) {
    worker_queues_[target].push_front(id);
  } else {
    master_queue_.push_front(id);
  }
}

bool Scheduler::try_pop(int worker_id, TaskId& out) {
  if (worker_id < config_.num_workers) {
    auto& own = worker_queues_[worker_id];
    if (!own.empty()) {  // LIFO on the local queue
      out = own.front();
      own.pop_front();
      return true;
    }
  } else if (!master_queue_.empty()) {  // master helping: its own queue first
    out = master_queue_.front();
    master_queue_.pop_front();
    return true;
  }
  if (worker_id < config_.num_workers && !master_queue_.empty()) {
    out = master_queue_.back();  // FIFO steal from the master queue
    master_queue_.pop_back();
    return true;
  }
  for (int i = 0; i < config_.num_workers; ++i) {
    const int victim = (worker_id + 1 + i) % config_.num_workers;
    if (victim == worker_id) continue;
    auto& q = worker_queues_[victim];
    if (!q.empty()) {
      out = q.back();  // FIFO steal
      q.pop_back();
      return true;
    }
  }
  return false;
}

void Scheduler::execute(std::unique_lock<std::mutex>& lock, TaskId id, int worker_id) {
  ++running_;
  // Move the kernel out so its captures die with this invocation.
  std::function<void()> kernel = std::move(tasks_[id].kernel);
  lock.unlock();
  const bool trace = config_.trace_enabled;
  const std::int64_t t0 = trace ? now_ns(epoch_) : 0;
  std::string error;
  bool failed = false;
  try {
    kernel();
  } catch (const std::exception& e) {
    failed = true;
    error = e.what();
  } catch (...) {
    failed = true;
    error = "unknown error";
  }
  const std::int64_t t1 = trace ? now_ns(epoch_) : 0;
  lock.lock();
  --running_;
  tasks_[id].start_ns = t0;
  tasks_[id].end_ns = t1;
  if (failed && !aborted_) {
    aborted_ = true;
    error_task_ = id;
    error_message_ = error;
  }
  complete(id, worker_id);
}

void Scheduler::complete(TaskId id, int worker_id) {
  Task& task = tasks_[id];
  task.state = TaskState::done;
  task.worker = worker_id;
  --pending_;
  // The master (worker_id == num_workers) has no queue of its own to pin
  // work to; only real workers record locality affinity.
  if (worker_id < config_.num_workers) {
    for (const TaskArg& arg : task.args) {
      if (arg.locality && arg.mode != Access::value) {
        handles_[arg.handle].locality_worker = worker_id;
      }
    }
  }
  if (!aborted_) {
    for (TaskId succ : task.successors) {
      if (--tasks_[succ].unresolved == 0) {
        tasks_[succ].state = TaskState::queued;
        enqueue_ready(succ);
      }
    }
    cv_ready_.notify_all();
  }
  cv_done_.notify_all();
}

void Scheduler::worker_loop(int worker_id) {
  std::unique_lock lock(mu_);
  for (;;) {
    if (stop_) return;
    TaskId id;
    if (!aborted_ && try_pop(worker_id, id)) {
      execute(lock, id, worker_id);
    } else {
      cv_ready_.wait(lock);
    }
  }
}

void Scheduler::wait_all() {
  require_master("wait_all");
  std::unique_lock lock(mu_);
  for (;;) {
    if (aborted_) {
      cv_done_.wait(lock, [&] { return running_ == 0; });
      throw std::runtime_error("task " + std::to_string(error_task_) +
                               " failed: " + error_message_);
    }
    if (pending_ == 0) return;
    TaskId id;
    if (try_pop(config_.num_workers, id)) {
      execute(lock, id, config_.num_workers);
    } else {
      cv_done_.wait(lock);
    }
  }
}

std::size_t Scheduler::task_count() const {
  std::unique_lock lock(mu_);
  return tasks_.size();
}

std::size_t Scheduler::window_high_water() const {
  std::unique_lock lock(mu_);
  return high_water_;
}

std::vector<TaskInfo> Scheduler::tasks() const {
  std::unique_lock lock(mu_);
  std::vector<TaskInfo> out;
  out.reserve(tasks_.size());
  for (TaskId id = 0; id < tasks_.size(); ++id) {
    const Task& t = tasks_[id];
    out.push_back({id, t.name, t.args, t.state, t.worker, t.start_ns, t.end_ns, t.predecessors});
  }
  return out;
}

void Scheduler::export_dag(const std::string& path) const {
  std::unique_lock lock(mu_);
  if (!config_.dag_capture) throw std::logic_error("export_dag requires dag_capture");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "digraph tasks {\n";
  for (TaskId id = 0; id < tasks_.size(); ++id) {
    out << "  t" << id << " [label=\"" << tasks_[id].name << " #" << id << "\"];\n";
  }
  for (TaskId id = 0; id < tasks_.size(); ++id) {
    for (TaskId p : tasks_[id].predecessors) {
      out << "  t" << p << " -> t" << id << ";\n";
    }
  }
  out << "}\n";
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

void Scheduler::export_trace(const std::string& path) const {
  std::unique_lock lock(mu_);
  if (!config_.trace_enabled) throw std::logic_error("export_trace requires trace_enabled");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "task_id,worker_id,kind,start_ns,end_ns\n";
  for (TaskId id = 0; id < tasks_.size(); ++id) {
    const Task& t = tasks_[id];
    if (t.state != TaskState::done) continue;
    out << id << ',' << t.worker << ',' << t.name << ',' << t.start_ns << ',' << t.end_ns << '\n';
  }
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

}  // namespace fmm
