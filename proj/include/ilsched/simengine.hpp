#pragma once

#include <cstdint>
#include <deque>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ilsched/appgraph.hpp"
#include "ilsched/platform.hpp"
#include "ilsched/rng.hpp"

namespace ilsched {

// An application bound to one platform: type names resolved to ids.
struct AppInfo {
  ApplicationGraph graph;
  std::vector<TypeId> type_ids;  // -1 if the platform does not declare the type
  std::vector<std::vector<TaskId>> successors;
  std::vector<int> depth;
  std::vector<TaskId> sources;
  bool runnable = false;  // every task type has at least one capable PE
};

struct PredRecord {
  TaskId task = 0;
  PeId pe = 0;
  double finish_us = 0.0;
  double volume = 0.0;
};

// One task of one frame whose predecessors are all done.
struct TaskInstance {
  FrameId frame_id = 0;
  TaskId task_id = 0;
  AppId app_id = 0;
  double ready_time = 0.0;  // latest predecessor finish; comm is charged at dispatch
  std::vector<PredRecord> preds;
  std::size_t frame_slot = 0;
};

struct TaskRecord {
  FrameId frame_id = 0;
  TaskId task_id = 0;
  AppId app_id = 0;
  PeId pe = 0;
  double ready_us = 0.0;
  double start_us = 0.0;
  double finish_us = 0.0;
  double energy_uj = 0.0;
};

struct FrameRecord {
  FrameId frame_id = 0;
  std::string app;
  double arrival_us = 0.0;
  double completion_us = 0.0;
  double latency_us = 0.0;
  double energy_uj = 0.0;
};

struct SimOptions {
  double noise_pct = 0.0;  // std of the multiplicative execution-time noise, as a fraction
  std::uint64_t seed = 1;
  bool record_tasks = true;
  bool measure_decisions = true;
};

// Energy in µJ of running for exec_us at power_mw.
inline double energy_uj(double exec_us, double power_mw) { return exec_us * power_mw * 1e-3; }

// Live simulator state. Schedulers receive it read-only.
class SimState {
 public:
  SimState(const ArchitectureGraph& arch, std::span<const ApplicationGraph> apps, SimOptions options = {});

  const ArchitectureGraph& arch() const { return *arch_; }
  const AppInfo& app(AppId id) const;
  AppId app_id_of(std::string_view name) const;

  double now() const { return now_; }
  std::span<const double> pe_ready_time() const { return pe_ready_; }
  // Ready, unassigned tasks ordered by (ready_time, frame_id, task_id).
  const std::vector<TaskInstance>& ready() const { return ready_; }
  // Increments whenever advance() opens a new scheduling epoch.
  std::uint64_t epoch() const { return epoch_; }

  void add_arrival(FrameId frame, std::string_view app, double time_us);
  // Applies every event at the next event time. False once nothing is pending.
  bool advance();
  // Assigns ready()[index] to pe and enqueues its completion.
  TaskRecord dispatch(std::size_t index, PeId pe);

  // Max over predecessors of comm_latency(pred PE -> pe, volume).
  double comm_delay(const TaskInstance& task, PeId pe) const;
  // max(pe_ready_time[pe], ready_time + comm_delay)
  double earliest_start(const TaskInstance& task, PeId pe) const;
  TypeId type_of(const TaskInstance& task) const;

  // What-if hook: overrides a PE's availability. Used by tests and benches.
  void set_pe_ready_time(PeId pe, double t);

  bool finished() const { return events_.empty() && ready_.empty(); }
  std::size_t frames_in_flight() const { return in_flight_; }
  // Dispatched tasks whose completion event has not fired yet, in start order.
  const std::deque<TaskRecord>& pe_queue(PeId pe) const { return pe_queue_[static_cast<std::size_t>(pe)]; }
  const std::vector<FrameRecord>& completed_frames() const { return completed_; }
  const std::vector<TaskRecord>& task_records() const { return tasks_; }
  double total_energy_uj() const { return total_energy_; }

 private:
  enum class EventKind : std::uint8_t { arrival, completion };
  struct Event {
    double time;
    std::uint64_t seq;
    EventKind kind;
    std::size_t slot;
    TaskId task;
    PeId pe;
    bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };
  struct TaskRuntime {
    int pending = 0;
    bool done = false;
    PeId pe = -1;
    double finish = 0.0;
  };
  struct FrameRuntime {
    FrameId id = 0;
    AppId app = 0;
    double arrival = 0.0;
    int remaining = 0;
    double completion = 0.0;
    double energy = 0.0;
    std::vector<TaskRuntime> tasks;
  };

  void make_ready(std::size_t slot, TaskId task);
  double noisy(double nominal);

  const ArchitectureGraph* arch_;
  std::vector<AppInfo> apps_;
  std::vector<int> app_index_;  // app id -> position in apps_
  SimOptions options_;
  Rng rng_;
  double now_ = 0.0;
  std::uint64_t epoch_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<double> pe_ready_;
  std::vector<std::deque<TaskRecord>> pe_queue_;
  std::vector<TaskInstance> ready_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::vector<FrameRuntime> frames_;
  std::size_t in_flight_ = 0;
  std::vector<FrameRecord> completed_;
  std::vector<TaskRecord> tasks_;
  double total_energy_ = 0.0;
};

// Pluggable scheduling policy. The engine calls pick() to choose which ready
// task goes next (default: the canonical head) and decide() exactly once per
// task instance.
class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual std::string name() const = 0;
  virtual std::size_t pick(const SimState& state) {
    (void)state;
    return 0;
  }
  virtual PeId decide(const SimState& state, const TaskInstance& task) = 0;
  // Number of decisions that needed a fallback path.
  virtual std::size_t fallbacks() const { return 0; }
};

struct LatencyStats {
  double mean_ns = 0.0;
  double median_ns = 0.0;
  double p99_ns = 0.0;
  std::size_t samples = 0;
};

LatencyStats latency_stats(std::vector<double> samples_ns);

struct SimReport {
  std::string scheduler;
  std::string platform;
  double injection_rate = 0.0;  // metadata only; 0 when unknown
  double noise_pct = 0.0;
  std::uint64_t seed = 0;
  std::vector<FrameRecord> frames;  // ordered by frame id
  std::vector<TaskRecord> tasks;
  std::size_t decisions = 0;
  std::size_t fallbacks = 0;
  LatencyStats decision_latency;

  double avg_latency_us() const;
  double avg_energy_uj() const;
  double total_energy_uj() const;
  double edp() const { return avg_energy_uj() * avg_latency_us(); }
  double ed2p() const { return avg_energy_uj() * avg_latency_us() * avg_latency_us(); }
};

SimReport run_simulation(const ArchitectureGraph& arch, std::span<const ApplicationGraph> apps,
                         const FrameArrivalTrace& trace, Scheduler& scheduler, const SimOptions& options = {});

// Mean over frames of latency_a / latency_b. Throws TraceMismatch unless both
// reports cover the same frames with the same apps and arrivals.
double slowdown(const SimReport& a, const SimReport& b);
// avg_latency(a) / avg_latency(b).
double aggregate_slowdown(const SimReport& a, const SimReport& b);

// Per-frame CSV; the first line carries the format version and run metadata.
std::string report_csv(const SimReport& report);
// Aggregate block. Wall-clock fields live under "wallclock" and can be omitted.
std::string report_json(const SimReport& report, bool include_wallclock = true);
SimReport load_report_csv(std::string_view text);

std::string tasks_csv(const SimReport& report);

}  // namespace ilsched
