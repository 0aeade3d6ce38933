#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ilsched {

using TaskId = int;
using AppId = int;
using FrameId = std::int64_t;

struct PredEdge {
  TaskId task = 0;
  double volume = 0.0;

  bool operator==(const PredEdge&) const = default;
};

struct TaskNode {
  TaskId id = 0;
  std::string type;
  std::vector<PredEdge> predecessors;

  bool operator==(const TaskNode&) const = default;
};

// One application as a DAG. Node ids are dense: nodes[i].id == i.
struct ApplicationGraph {
  AppId app_id = 0;
  std::string name;
  std::vector<TaskNode> nodes;

  std::size_t size() const { return nodes.size(); }
  bool operator==(const ApplicationGraph&) const = default;
};

// Empty result means the graph is a valid DAG.
std::vector<std::string> validate_dag(const ApplicationGraph& app);

std::vector<std::vector<TaskId>> successor_lists(const ApplicationGraph& app);
// Kahn order, smallest ready id first. Throws ValidationError on a cycle.
std::vector<TaskId> topological_order(const ApplicationGraph& app);
// Longest edge-path to any terminal node; terminals are 0.
std::vector<int> downward_depths(const ApplicationGraph& app);
int downward_depth(const ApplicationGraph& app, TaskId task);

ApplicationGraph load_dag(std::string_view document);
std::string dump_dag(const ApplicationGraph& app);

// ---- synthetic suite ---------------------------------------------------------

struct LayeredDagOptions {
  std::uint64_t seed = 1;
  int max_width = 4;
  int max_fan_in = 3;
  int min_volume = 2;
  int max_volume = 32;
};

// Layered random DAG over the given task types (one node per entry, order
// shuffled by the seed). Node 0 is the only source; fan-in never exceeds
// max_fan_in.
ApplicationGraph generate_layered_dag(std::string name, AppId app_id, std::vector<std::string> types,
                                      const LayeredDagOptions& options);

// WiFi-TX, WiFi-RX, RangeDet, SC-TX, SC-RX, TempMit (the mixed-workload suite).
const std::vector<std::string>& suite_app_names();
// Suite plus PulseDoppler.
std::vector<std::string> builtin_app_names();
ApplicationGraph builtin_app(std::string_view name);
std::vector<ApplicationGraph> builtin_suite();

// ---- workloads -----------------------------------------------------------------

enum class ArrivalModel { exponential, periodic };

struct WorkloadEntry {
  std::string app;
  int frames = 0;

  bool operator==(const WorkloadEntry&) const = default;
};

struct WorkloadSpec {
  std::vector<WorkloadEntry> entries;
  double injection_rate = 1.0;  // frames per ms
  ArrivalModel arrival_model = ArrivalModel::exponential;
  std::uint64_t seed = 1;

  int total_frames() const;
  bool operator==(const WorkloadSpec&) const = default;
};

struct Arrival {
  double time_us = 0.0;
  std::string app;
  FrameId frame_id = 0;

  bool operator==(const Arrival&) const = default;
};

struct FrameArrivalTrace {
  std::vector<Arrival> arrivals;

  bool operator==(const FrameArrivalTrace&) const = default;
};

// The 500-frame mix: per-app frame counts of the reference workload.
WorkloadSpec mixed_workload(double injection_rate, std::uint64_t seed = 1);

// Deterministic in spec. Frames are a seeded shuffle of the app multiset;
// the first arrival is at t=0 and frame ids follow arrival order.
FrameArrivalTrace generate_trace(const WorkloadSpec& spec, std::span<const std::string> known_apps);
FrameArrivalTrace generate_trace(const WorkloadSpec& spec);

std::string dump_trace(const FrameArrivalTrace& trace);
FrameArrivalTrace load_trace(std::string_view text);

std::string dump_workload(const WorkloadSpec& spec);
WorkloadSpec load_workload(std::string_view document);

}  // namespace ilsched
