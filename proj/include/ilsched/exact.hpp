#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ilsched/appgraph.hpp"
#include "ilsched/oracle.hpp"
#include "ilsched/platform.hpp"

namespace ilsched {

struct ExactOptions {
  double time_limit_s = 60.0;
  std::uint64_t node_limit = 0;  // 0 = unlimited
};

struct ScheduledTask {
  TaskId task = 0;
  PeId pe = -1;
  double start_us = 0.0;
  double finish_us = 0.0;
};

struct ExactResult {
  double makespan_us = 0.0;
  std::vector<ScheduledTask> schedule;  // in start order
  bool optimal = false;                 // false when a limit cut the search short
  std::uint64_t nodes = 0;
};

// Single-frame minimum makespan: the frame arrives at t=0 on an idle platform
// and the timing model matches the simulator with zero noise. Depth-first
// branch and bound over (next task, PE) with critical-path and load lower
// bounds, seeded with the ETF schedule. Deterministic for a fixed node
// limit; with only a time limit the optimal flag may depend on machine speed.
ExactResult exact_schedule(const ApplicationGraph& app, const ArchitectureGraph& arch, const ExactOptions& options = {});

// Places tasks in the given sequence, each at max(PE free, preds finish + comm).
// Throws ValidationError if the sequence breaks precedence or names an
// incapable PE.
std::vector<ScheduledTask> list_schedule(const ApplicationGraph& app, const ArchitectureGraph& arch,
                                         const std::vector<std::pair<TaskId, PeId>>& sequence);
double makespan_of(const std::vector<ScheduledTask>& schedule);

// Makespan of one frame simulated alone under the ETF oracle.
double etf_single_frame_makespan(const ApplicationGraph& app, const ArchitectureGraph& arch,
                                 Objective objective = Objective::performance);

}  // namespace ilsched
