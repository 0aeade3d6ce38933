#include "ilsched/oracle.hpp"

#include "ilsched/error.hpp"

namespace ilsched {

std::string_view objective_name(Objective objective) {
  switch (objective) {
    case Objective::performance:
      return "performance";
    case Objective::energy:
      return "energy";
    case Objective::edp:
      return "edp";
    case Objective::ed2p:
      return "ed2p";
  }
  return "performance";
}

Objective parse_objective(std::string_view name) {
  for (auto o : {Objective::performance, Objective::energy, Objective::edp, Objective::ed2p}) {
    if (objective_name(o) == name) return o;
  }
  throw ParseError("unknown objective '" + std::string(name) + "'");
}

double objective_metric(const SimReport& report, Objective objective) {
  switch (objective) {
    case Objective::performance:
      return report.avg_latency_us();
    case Objective::energy:
      return report.avg_energy_uj();
    case Objective::edp:
      return report.edp();
    case Objective::ed2p:
      return report.ed2p();
  }
  return report.avg_latency_us();
}

EtfCandidate etf_evaluate(const SimState& state, std::size_t index, PeId pe, Objective objective) {
  const TaskInstance& task = state.ready()[index];
  const TaskCost& c = state.arch().pe(pe).cost(state.type_of(task));
  EtfCandidate out;
  out.ready_index = index;
  out.pe = pe;
  out.finish_us = state.earliest_start(task, pe) + c.exec_us;
  const double energy = energy_uj(c.exec_us, c.power_mw);
  const double span = out.finish_us - task.ready_time;
  switch (objective) {
    case Objective::performance:
      out.cost = out.finish_us;
      break;
    case Objective::energy:
      out.cost = energy;
      break;
    case Objective::edp:
      out.cost = span * energy;
      break;
    case Objective::ed2p:
      out.cost = span * span * energy;
      break;
  }
  return out;
}

bool etf_prefers(const EtfCandidate& a, const EtfCandidate& b, Objective objective) {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (objective != Objective::performance && a.finish_us != b.finish_us) return a.finish_us < b.finish_us;
  if (a.pe != b.pe) return a.pe < b.pe;
  return a.ready_index < b.ready_index;
}

EtfCandidate etf_best_for_task(const SimState& state, std::size_t index, Objective objective) {
  if (index >= state.ready().size()) throw TaskNotReady("ready index out of range");
  const TypeId type = state.type_of(state.ready()[index]);
  EtfCandidate best;
  bool found = false;
  for (const auto& pe : state.arch().pes) {
    if (!pe.supports(type)) continue;
    EtfCandidate c = etf_evaluate(state, index, pe.id, objective);
    if (!found || etf_prefers(c, best, objective)) {
      best = c;
      found = true;
    }
  }
  if (!found) throw NoCapablePe("no PE supports the ready task");
  return best;
}

EtfCandidate etf_decide(const SimState& state, Objective objective) {
  if (state.ready().empty()) throw NoCapablePe("ready set is empty");
  EtfCandidate best = etf_best_for_task(state, 0, objective);
  for (std::size_t i = 1; i < state.ready().size(); ++i) {
    EtfCandidate c = etf_best_for_task(state, i, objective);
    if (etf_prefers(c, best, objective)) best = c;
  }
  return best;
}

std::vector<OracleDecision> oracle_schedule_step(SimState& state, Objective objective, const FeatureExtractor* extractor) {
  std::vector<OracleDecision> out;
  while (!state.ready().empty()) {
    const EtfCandidate c = etf_decide(state, objective);
    const TaskInstance& task = state.ready()[c.ready_index];
    OracleDecision d;
    d.frame_id = task.frame_id;
    d.task_id = task.task_id;
    d.app_id = task.app_id;
    d.ready_index = c.ready_index;
    d.pe = c.pe;
    d.cluster = state.arch().pe(c.pe).cluster_id;
    d.objective = objective;
    if (extractor) d.features = extractor->extract(state, c.ready_index);
    state.dispatch(c.ready_index, c.pe);
    out.push_back(std::move(d));
  }
  return out;
}

std::size_t ready_index_of(const SimState& state, const TaskInstance& task) {
  const auto& ready = state.ready();
  if (!ready.empty() && &task >= ready.data() && &task < ready.data() + ready.size()) {
    return static_cast<std::size_t>(&task - ready.data());
  }
  for (std::size_t i = 0; i < ready.size(); ++i) {
    if (ready[i].frame_id == task.frame_id && ready[i].task_id == task.task_id) return i;
  }
  throw TaskNotReady("task is not in the ready set");
}

std::string EtfScheduler::name() const {
  std::string n = "etf-" + std::string(objective_name(objective_));
  if (order_ == EtfTaskOrder::canonical) n += "-canonical";
  return n;
}

std::size_t EtfScheduler::pick(const SimState& state) {
  if (order_ == EtfTaskOrder::canonical) {
    has_pending_ = false;
    return 0;
  }
  pending_ = etf_decide(state, objective_);
  has_pending_ = true;
  return pending_.ready_index;
}

PeId EtfScheduler::decide(const SimState& state, const TaskInstance& task) {
  const std::size_t index = ready_index_of(state, task);
  EtfCandidate c;
  if (has_pending_ && pending_.ready_index == index) {
    c = pending_;
  } else {
    c = etf_best_for_task(state, index, objective_);
  }
  has_pending_ = false;
  if (recorder_) recorder_(state, index, c.pe);
  return c.pe;
}

}  // namespace ilsched
