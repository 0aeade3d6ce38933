#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ilsched/features.hpp"
#include "ilsched/simengine.hpp"

namespace ilsched {

enum class Objective { performance, energy, edp, ed2p };

std::string_view objective_name(Objective objective);
// Accepts "performance", "energy", "edp", "ed2p". Throws ParseError.
Objective parse_objective(std::string_view name);
// Report metric an objective optimizes: avg latency, avg energy, EDP or ED2P.
double objective_metric(const SimReport& report, Objective objective);

// One (ready task, PE) candidate under nominal costs.
struct EtfCandidate {
  std::size_t ready_index = 0;
  PeId pe = -1;
  double finish_us = 0.0;
  double cost = 0.0;
};

// Cost of placing state.ready()[index] on pe:
//   performance  finish = earliest_start + exec
//   energy       exec * power
//   edp          (finish - ready_time) * energy
//   ed2p         (finish - ready_time)^2 * energy
// The PE must support the task.
EtfCandidate etf_evaluate(const SimState& state, std::size_t index, PeId pe, Objective objective);

// Strict preference: lower cost, then (for non-performance objectives) lower
// finish, then lower PE id, then lower ready index.
bool etf_prefers(const EtfCandidate& a, const EtfCandidate& b, Objective objective);

// Minimizing pair over all ready tasks and capable PEs. Throws NoCapablePe
// when the ready set is empty or no candidate exists.
EtfCandidate etf_decide(const SimState& state, Objective objective);
// Minimizing PE for one ready task (the oracle's label for that task).
EtfCandidate etf_best_for_task(const SimState& state, std::size_t index, Objective objective);

struct OracleDecision {
  FrameId frame_id = 0;
  TaskId task_id = 0;
  AppId app_id = 0;
  std::size_t ready_index = 0;  // position in the ready set when decided
  PeId pe = -1;
  ClusterId cluster = -1;
  FeatureVector features;  // empty when no extractor was supplied
  Objective objective = Objective::performance;
};

// Applies etf_decide to the shrinking ready set until it is empty,
// dispatching each pair. Features are captured before each dispatch.
std::vector<OracleDecision> oracle_schedule_step(SimState& state, Objective objective,
                                                 const FeatureExtractor* extractor = nullptr);

enum class EtfTaskOrder {
  best_pair,  // scan every (ready task, PE) pair, re-evaluated after each dispatch
  canonical,  // take ready tasks in canonical order, best PE for each
};

// ETF as a simulator scheduler. The optional recorder sees every decision
// before the dispatch happens.
class EtfScheduler : public Scheduler {
 public:
  using Recorder = std::function<void(const SimState&, std::size_t ready_index, PeId pe)>;

  explicit EtfScheduler(Objective objective = Objective::performance, EtfTaskOrder order = EtfTaskOrder::best_pair)
      : objective_(objective), order_(order) {}

  std::string name() const override;
  std::size_t pick(const SimState& state) override;
  PeId decide(const SimState& state, const TaskInstance& task) override;
  void set_recorder(Recorder recorder) { recorder_ = std::move(recorder); }

 private:
  Objective objective_;
  EtfTaskOrder order_;
  Recorder recorder_;
  EtfCandidate pending_;
  bool has_pending_ = false;
};

// Index of a task reference inside state.ready(). Throws TaskNotReady.
std::size_t ready_index_of(const SimState& state, const TaskInstance& task);

}  // namespace ilsched
