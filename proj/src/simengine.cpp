#include "ilsched/simengine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "ilsched/error.hpp"
#include "ilsched/textio.hpp"

namespace ilsched {

SimState::SimState(const ArchitectureGraph& arch, std::span<const ApplicationGraph> apps, SimOptions options)
    : arch_(&arch), options_(options), rng_(options.seed) {
  for (const auto& g : apps) {
    auto violations = validate_dag(g);
    if (!violations.empty()) throw ValidationError(g.name + ": " + violations.front());
    AppInfo info;
    info.graph = g;
    info.successors = successor_lists(g);
    info.depth = downward_depths(g);
    info.runnable = true;
    for (const auto& node : g.nodes) {
      TypeId t = arch.find_type(node.type);
      info.type_ids.push_back(t);
      bool capable = std::any_of(arch.pes.begin(), arch.pes.end(), [&](const auto& pe) { return pe.supports(t); });
      if (!capable) info.runnable = false;
      if (node.predecessors.empty()) info.sources.push_back(node.id);
    }
    if (g.app_id < 0) throw ValidationError(g.name + ": negative app id");
    if (static_cast<std::size_t>(g.app_id) >= app_index_.size()) app_index_.resize(static_cast<std::size_t>(g.app_id) + 1, -1);
    if (app_index_[static_cast<std::size_t>(g.app_id)] != -1) throw ValidationError("duplicate app id " + std::to_string(g.app_id));
    app_index_[static_cast<std::size_t>(g.app_id)] = static_cast<int>(apps_.size());
    apps_.push_back(std::move(info));
  }
  pe_ready_.assign(arch.pe_count(), 0.0);
  pe_queue_.resize(arch.pe_count());
}

const AppInfo& SimState::app(AppId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= app_index_.size() || app_index_[static_cast<std::size_t>(id)] < 0) {
    throw UnknownApp("app id " + std::to_string(id) + " not loaded");
  }
  return apps_[static_cast<std::size_t>(app_index_[static_cast<std::size_t>(id)])];
}

AppId SimState::app_id_of(std::string_view name) const {
  for (const auto& a : apps_) {
    if (a.graph.name == name) return a.graph.app_id;
  }
  throw UnknownApp("application '" + std::string(name) + "' not loaded");
}

TypeId SimState::type_of(const TaskInstance& task) const {
  return app(task.app_id).type_ids[static_cast<std::size_t>(task.task_id)];
}

void SimState::add_arrival(FrameId frame, std::string_view app_name, double time_us) {
  AppId id = app_id_of(app_name);
  const auto& info = app(id);
  if (!info.runnable) throw NoCapablePe(info.graph.name + " has a task type no PE of " + arch_->name + " supports");
  FrameRuntime fr;
  fr.id = frame;
  fr.app = id;
  fr.arrival = time_us;
  fr.remaining = static_cast<int>(info.graph.size());
  fr.tasks.resize(info.graph.size());
  for (const auto& node : info.graph.nodes) {
    fr.tasks[static_cast<std::size_t>(node.id)].pending = static_cast<int>(node.predecessors.size());
  }
  frames_.push_back(std::move(fr));
  events_.push(Event{time_us, seq_++, EventKind::arrival, frames_.size() - 1, 0, -1});
}

void SimState::make_ready(std::size_t slot, TaskId task) {
  const auto& fr = frames_[slot];
  const auto& node = app(fr.app).graph.nodes[static_cast<std::size_t>(task)];
  TaskInstance inst;
  inst.frame_id = fr.id;
  inst.task_id = task;
  inst.app_id = fr.app;
  inst.frame_slot = slot;
  inst.ready_time = fr.arrival;
  for (const auto& e : node.predecessors) {
    const auto& pr = fr.tasks[static_cast<std::size_t>(e.task)];
    inst.preds.push_back({e.task, pr.pe, pr.finish, e.volume});
    inst.ready_time = std::max(inst.ready_time, pr.finish);
  }
  ready_.push_back(std::move(inst));
}

bool SimState::advance() {
  if (!ready_.empty()) throw std::logic_error("advance() called with undispatched ready tasks");
  if (events_.empty()) return false;
  const double t = events_.top().time;
  now_ = std::max(now_, t);
  while (!events_.empty() && events_.top().time == t) {
    Event ev = events_.top();
    events_.pop();
    auto& fr = frames_[ev.slot];
    const auto& info = app(fr.app);
    if (ev.kind == EventKind::arrival) {
      ++in_flight_;
      for (TaskId s : info.sources) make_ready(ev.slot, s);
      continue;
    }
    auto& q = pe_queue_[static_cast<std::size_t>(ev.pe)];
    if (!q.empty() && q.front().frame_id == fr.id && q.front().task_id == ev.task) q.pop_front();
    auto& tr = fr.tasks[static_cast<std::size_t>(ev.task)];
    tr.done = true;
    if (--fr.remaining == 0) {
      fr.completion = ev.time;
      --in_flight_;
      completed_.push_back({fr.id, info.graph.name, fr.arrival, fr.completion, fr.completion - fr.arrival, fr.energy});
    }
    for (TaskId s : info.successors[static_cast<std::size_t>(ev.task)]) {
      if (--fr.tasks[static_cast<std::size_t>(s)].pending == 0) make_ready(ev.slot, s);
    }
  }
  std::sort(ready_.begin(), ready_.end(), [](const TaskInstance& a, const TaskInstance& b) {
    if (a.ready_time != b.ready_time) return a.ready_time < b.ready_time;
    if (a.frame_id != b.frame_id) return a.frame_id < b.frame_id;
    return a.task_id < b.task_id;
  });
  ++epoch_;
  return true;
}

double SimState::comm_delay(const TaskInstance& task, PeId pe) const {
  double delay = 0.0;
  for (const auto& p : task.preds) {
    if (p.pe == pe) continue;
    delay = std::max(delay, arch_->link_rate(p.pe, pe) * p.volume);
  }
  return delay;
}

double SimState::earliest_start(const TaskInstance& task, PeId pe) const {
  return std::max(pe_ready_[static_cast<std::size_t>(pe)], task.ready_time + comm_delay(task, pe));
}

void SimState::set_pe_ready_time(PeId pe, double t) {
  arch_->pe(pe);
  pe_ready_[static_cast<std::size_t>(pe)] = t;
}

double SimState::noisy(double nominal) {
  if (options_.noise_pct <= 0.0) return nominal;
  double z = std::clamp(rng_.normal(), -3.0, 3.0);
  double factor = std::max(1.0 + options_.noise_pct * z, 0.01);
  return nominal * factor;
}

TaskRecord SimState::dispatch(std::size_t index, PeId pe) {
  if (index >= ready_.size()) throw TaskNotReady("ready index out of range");
  const auto& pe_info = arch_->pe(pe);
  const TypeId type = type_of(ready_[index]);
  if (!pe_info.supports(type)) {
    const auto& r = ready_[index];
    throw UnsupportedTask("PE " + std::to_string(pe) + " cannot run type " +
                          app(r.app_id).graph.nodes[static_cast<std::size_t>(r.task_id)].type);
  }
  TaskInstance task = std::move(ready_[index]);
  ready_.erase(ready_.begin() + static_cast<std::ptrdiff_t>(index));
  const auto& cost = pe_info.cost(type);
  const double start = earliest_start(task, pe);
  const double exec = noisy(cost.exec_us);
  const double finish = start + exec;
  const double energy = energy_uj(exec, cost.power_mw);
  pe_ready_[static_cast<std::size_t>(pe)] = finish;

  auto& fr = frames_[task.frame_slot];
  auto& tr = fr.tasks[static_cast<std::size_t>(task.task_id)];
  tr.pe = pe;
  tr.finish = finish;
  fr.energy += energy;
  total_energy_ += energy;

  TaskRecord rec{task.frame_id, task.task_id, task.app_id, pe, task.ready_time, start, finish, energy};
  pe_queue_[static_cast<std::size_t>(pe)].push_back(rec);
  if (options_.record_tasks) tasks_.push_back(rec);
  events_.push(Event{finish, seq_++, EventKind::completion, task.frame_slot, task.task_id, pe});
  return rec;
}

// ---- reports -------------------------------------------------------------------

LatencyStats latency_stats(std::vector<double> samples) {
  LatencyStats s;
  s.samples = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean_ns = sum / static_cast<double>(samples.size());
  s.median_ns = samples[samples.size() / 2];
  auto p99 = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(samples.size()))) - 1;
  s.p99_ns = samples[std::min(p99, samples.size() - 1)];
  return s;
}

double SimReport::avg_latency_us() const {
  if (frames.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& f : frames) sum += f.latency_us;
  return sum / static_cast<double>(frames.size());
}

double SimReport::total_energy_uj() const {
  double sum = 0.0;
  for (const auto& f : frames) sum += f.energy_uj;
  return sum;
}

double SimReport::avg_energy_uj() const {
  if (frames.empty()) return 0.0;
  return total_energy_uj() / static_cast<double>(frames.size());
}

SimReport run_simulation(const ArchitectureGraph& arch, std::span<const ApplicationGraph> apps,
                         const FrameArrivalTrace& trace, Scheduler& scheduler, const SimOptions& options) {
  SimState state(arch, apps, options);
  for (const auto& a : trace.arrivals) state.add_arrival(a.frame_id, a.app, a.time_us);

  SimReport report;
  report.scheduler = scheduler.name();
  report.platform = arch.name;
  report.noise_pct = options.noise_pct;
  report.seed = options.seed;
  std::vector<double> decision_ns;
  if (options.measure_decisions) decision_ns.reserve(trace.arrivals.size() * 16);

  using clock = std::chrono::steady_clock;
  while (state.advance()) {
    while (!state.ready().empty()) {
      clock::time_point t0;
      if (options.measure_decisions) t0 = clock::now();
      const std::size_t index = scheduler.pick(state);
      if (index >= state.ready().size()) throw SchedulerError(scheduler.name() + " picked an invalid ready index");
      const TaskInstance& task = state.ready()[index];
      const PeId pe = scheduler.decide(state, task);
      if (options.measure_decisions) {
        decision_ns.push_back(std::chrono::duration<double, std::nano>(clock::now() - t0).count());
      }
      if (pe < 0 || static_cast<std::size_t>(pe) >= arch.pe_count() || !arch.pe(pe).supports(state.type_of(task))) {
        throw SchedulerError(scheduler.name() + " returned PE " + std::to_string(pe) + " which cannot run the task");
      }
      state.dispatch(index, pe);
      ++report.decisions;
    }
  }
  report.frames = state.completed_frames();
  std::sort(report.frames.begin(), report.frames.end(), [](const auto& a, const auto& b) { return a.frame_id < b.frame_id; });
  if (options.record_tasks) report.tasks = state.task_records();
  report.fallbacks = scheduler.fallbacks();
  report.decision_latency = latency_stats(std::move(decision_ns));
  return report;
}

namespace {

void check_same_trace(const SimReport& a, const SimReport& b) {
  if (a.frames.size() != b.frames.size()) throw TraceMismatch("reports cover different frame counts");
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    const auto& fa = a.frames[i];
    const auto& fb = b.frames[i];
    if (fa.frame_id != fb.frame_id || fa.app != fb.app || fa.arrival_us != fb.arrival_us) {
      throw TraceMismatch("frame " + std::to_string(fa.frame_id) + " differs between reports");
    }
  }
}

}  // namespace

double slowdown(const SimReport& a, const SimReport& b) {
  check_same_trace(a, b);
  if (a.frames.empty()) throw TraceMismatch("reports contain no frames");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.frames.size(); ++i) sum += a.frames[i].latency_us / b.frames[i].latency_us;
  return sum / static_cast<double>(a.frames.size());
}

double aggregate_slowdown(const SimReport& a, const SimReport& b) {
  check_same_trace(a, b);
  return a.avg_latency_us() / b.avg_latency_us();
}

namespace {

std::string token(std::string s) {
  for (auto& c : s) {
    if (c == ' ' || c == ',' || c == '=') c = '_';
  }
  return s;
}

}  // namespace

std::string report_csv(const SimReport& r) {
  using textio::format_double;
  std::string out = "# ilsched-report format_version=1 scheduler=" + token(r.scheduler) + " platform=" + token(r.platform) +
                    " injection_rate=" + format_double(r.injection_rate) + " noise_pct=" + format_double(r.noise_pct) +
                    " seed=" + std::to_string(r.seed) + "\n";
  out += "frame_id,app,arrival_us,completion_us,latency_us,energy_uj\n";
  for (const auto& f : r.frames) {
    out += std::to_string(f.frame_id) + ',' + f.app + ',' + format_double(f.arrival_us) + ',' + format_double(f.completion_us) +
           ',' + format_double(f.latency_us) + ',' + format_double(f.energy_uj) + '\n';
  }
  return out;
}

std::string tasks_csv(const SimReport& r) {
  using textio::format_double;
  std::string out = "# ilsched-tasks format_version=1\nframe_id,app_id,task_id,pe,ready_us,start_us,finish_us,energy_uj\n";
  for (const auto& t : r.tasks) {
    out += std::to_string(t.frame_id) + ',' + std::to_string(t.app_id) + ',' + std::to_string(t.task_id) + ',' +
           std::to_string(t.pe) + ',' + format_double(t.ready_us) + ',' + format_double(t.start_us) + ',' +
           format_double(t.finish_us) + ',' + format_double(t.energy_uj) + '\n';
  }
  return out;
}

std::string report_json(const SimReport& r, bool include_wallclock) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["scheduler"] = r.scheduler;
  j["platform"] = r.platform;
  j["injection_rate"] = r.injection_rate;
  j["noise_pct"] = r.noise_pct;
  j["seed"] = r.seed;
  j["frames"] = r.frames.size();
  j["decisions"] = r.decisions;
  j["fallbacks"] = r.fallbacks;
  j["avg_latency_us"] = r.avg_latency_us();
  j["avg_energy_uj"] = r.avg_energy_uj();
  j["total_energy_uj"] = r.total_energy_uj();
  j["edp"] = r.edp();
  j["ed2p"] = r.ed2p();
  if (include_wallclock) {
    j["wallclock"] = {{"decision_mean_ns", r.decision_latency.mean_ns},
                      {"decision_median_ns", r.decision_latency.median_ns},
                      {"decision_p99_ns", r.decision_latency.p99_ns}};
  }
  return j.dump(2) + "\n";
}

SimReport load_report_csv(std::string_view text) {
  SimReport r;
  bool header = false;
  for (auto raw : textio::split(text, '\n')) {
    auto line = textio::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      for (auto field : textio::split(line.substr(1), ' ')) {
        auto eq = field.find('=');
        if (eq == std::string_view::npos) continue;
        auto key = field.substr(0, eq);
        auto value = field.substr(eq + 1);
        if (key == "format_version" && value != "1") throw ParseError("unsupported report format version");
        if (key == "scheduler") r.scheduler = std::string(value);
        if (key == "platform") r.platform = std::string(value);
        if (key == "injection_rate") r.injection_rate = textio::parse_double(value);
        if (key == "noise_pct") r.noise_pct = textio::parse_double(value);
        if (key == "seed") r.seed = static_cast<std::uint64_t>(textio::parse_int(value));
      }
      continue;
    }
    if (!header) {
      if (line != "frame_id,app,arrival_us,completion_us,latency_us,energy_uj") throw ParseError("unexpected report header");
      header = true;
      continue;
    }
    auto c = textio::split(line, ',');
    if (c.size() != 6) throw ParseError("report row needs 6 columns");
    r.frames.push_back({textio::parse_int(c[0]), std::string(c[1]), textio::parse_double(c[2]), textio::parse_double(c[3]),
                        textio::parse_double(c[4]), textio::parse_double(c[5])});
  }
  return r;
}

}  // namespace ilsched
