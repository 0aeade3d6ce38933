#include "ilsched/exact.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "ilsched/error.hpp"

namespace ilsched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Problem {
  int n = 0;
  int m = 0;
  std::vector<std::vector<double>> exec;  // [task][pe], inf when unsupported
  std::vector<double> min_exec;
  std::vector<double> tail;               // min_exec plus longest min_exec path below
  std::vector<std::vector<PredEdge>> preds;
  std::vector<std::vector<TaskId>> succ;
  std::vector<TaskId> topo;
  std::vector<int> sym_class;             // PEs with equal class are interchangeable while unused
  const ArchitectureGraph* arch = nullptr;
};

Problem make_problem(const ApplicationGraph& app, const ArchitectureGraph& arch) {
  auto violations = validate_dag(app);
  if (!violations.empty()) throw ValidationError(app.name + ": " + violations.front());
  Problem p;
  p.arch = &arch;
  p.n = static_cast<int>(app.size());
  p.m = static_cast<int>(arch.pe_count());
  p.exec.assign(static_cast<std::size_t>(p.n), std::vector<double>(static_cast<std::size_t>(p.m), kInf));
  p.min_exec.assign(static_cast<std::size_t>(p.n), kInf);
  for (const auto& node : app.nodes) {
    const TypeId type = arch.find_type(node.type);
    for (const auto& pe : arch.pes) {
      if (!pe.supports(type)) continue;
      p.exec[static_cast<std::size_t>(node.id)][static_cast<std::size_t>(pe.id)] = pe.cost(type).exec_us;
      p.min_exec[static_cast<std::size_t>(node.id)] = std::min(p.min_exec[static_cast<std::size_t>(node.id)], pe.cost(type).exec_us);
    }
    if (p.min_exec[static_cast<std::size_t>(node.id)] == kInf) throw NoCapablePe("no PE runs " + node.type);
    p.preds.push_back(node.predecessors);
  }
  p.topo = topological_order(app);
  p.succ = successor_lists(app);
  p.tail.assign(static_cast<std::size_t>(p.n), 0.0);
  for (auto it = p.topo.rbegin(); it != p.topo.rend(); ++it) {
    double below = 0.0;
    for (TaskId s : p.succ[static_cast<std::size_t>(*it)]) below = std::max(below, p.tail[static_cast<std::size_t>(s)]);
    p.tail[static_cast<std::size_t>(*it)] = p.min_exec[static_cast<std::size_t>(*it)] + below;
  }

  // Symmetry holds when link rates depend only on the two clusters and on
  // whether the PEs coincide.
  bool uniform = true;
  for (int a = 0; a < p.m && uniform; ++a) {
    for (int b = 0; b < p.m && uniform; ++b) {
      if (a == b) continue;
      for (int c = 0; c < p.m && uniform; ++c) {
        for (int d = 0; d < p.m && uniform; ++d) {
          if (c == d) continue;
          if (arch.pes[static_cast<std::size_t>(a)].cluster_id == arch.pes[static_cast<std::size_t>(c)].cluster_id &&
              arch.pes[static_cast<std::size_t>(b)].cluster_id == arch.pes[static_cast<std::size_t>(d)].cluster_id &&
              arch.link_rate(a, b) != arch.link_rate(c, d)) {
            uniform = false;
          }
        }
      }
    }
  }
  p.sym_class.resize(static_cast<std::size_t>(p.m));
  for (int q = 0; q < p.m; ++q) p.sym_class[static_cast<std::size_t>(q)] = uniform ? arch.pes[static_cast<std::size_t>(q)].cluster_id : -1 - q;
  return p;
}

class Search {
 public:
  Search(const Problem& p, const ExactOptions& o) : p_(p), opts_(o) {
    const auto n = static_cast<std::size_t>(p.n);
    const auto m = static_cast<std::size_t>(p.m);
    avail_.assign(m, 0.0);
    used_.assign(m, 0);
    pe_of_.assign(n, -1);
    finish_.assign(n, 0.0);
    start_.assign(n, 0.0);
    pending_.assign(n, 0);
    for (std::size_t t = 0; t < n; ++t) pending_[t] = static_cast<int>(p.preds[t].size());
    est_.assign(n, 0.0);
    deadline_ = std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                       std::chrono::duration<double>(o.time_limit_s));
  }

  void set_incumbent(double makespan, std::vector<ScheduledTask> schedule) {
    best_ = makespan;
    best_schedule_ = std::move(schedule);
  }

  ExactResult run() {
    dfs(0.0, -1);
    ExactResult r;
    r.makespan_us = best_;
    r.schedule = best_schedule_;
    r.optimal = !aborted_;
    r.nodes = nodes_;
    return r;
  }

 private:
  // Same rule as the simulator: last predecessor finish plus the largest
  // incoming transfer.
  double data_ready(int t, int q) const {
    double ready = 0.0;
    double comm = 0.0;
    for (const auto& e : p_.preds[static_cast<std::size_t>(t)]) {
      const PeId src = pe_of_[static_cast<std::size_t>(e.task)];
      if (src != q) comm = std::max(comm, p_.arch->link_rate(src, q) * e.volume);
      ready = std::max(ready, finish_[static_cast<std::size_t>(e.task)]);
    }
    return ready + comm;
  }

  double lower_bound(double last_start, double current) {
    double lb = current;
    double load = 0.0;
    for (int q = 0; q < p_.m; ++q) load += std::max(avail_[static_cast<std::size_t>(q)], last_start);
    for (TaskId t : p_.topo) {
      const auto ti = static_cast<std::size_t>(t);
      if (pe_of_[ti] >= 0) continue;
      double head = last_start;
      for (const auto& e : p_.preds[ti]) {
        const auto pi = static_cast<std::size_t>(e.task);
        head = std::max(head, pe_of_[pi] >= 0 ? finish_[pi] : est_[pi] + p_.min_exec[pi]);
      }
      est_[ti] = head;
      double best_finish = kInf;
      for (int q = 0; q < p_.m; ++q) {
        const double x = p_.exec[ti][static_cast<std::size_t>(q)];
        if (x == kInf) continue;
        best_finish = std::min(best_finish, std::max(head, avail_[static_cast<std::size_t>(q)]) + x);
      }
      lb = std::max(lb, best_finish + p_.tail[ti] - p_.min_exec[ti]);
      load += p_.min_exec[ti];
    }
    return std::max(lb, load / p_.m);
  }

  bool out_of_budget() {
    if (opts_.node_limit && nodes_ >= opts_.node_limit) return true;
    if ((nodes_ & 1023) == 0 && std::chrono::steady_clock::now() > deadline_) return true;
    return false;
  }

  void dfs(double last_start, int last_task) {
    if (aborted_) return;
    ++nodes_;
    if (out_of_budget()) {
      aborted_ = true;
      return;
    }
    double current = 0.0;
    for (double a : avail_) current = std::max(current, a);
    if (static_cast<int>(path_.size()) == p_.n) {
      if (current < best_) {
        best_ = current;
        best_schedule_ = path_;
      }
      return;
    }
    if (lower_bound(last_start, current) >= best_) return;

    struct Child {
      double finish;
      double start;
      int task;
      int pe;
    };
    std::vector<Child> children;
    for (int t = 0; t < p_.n; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      if (pe_of_[ti] >= 0 || pending_[ti] > 0) continue;
      std::vector<int> seen_classes;
      for (int q = 0; q < p_.m; ++q) {
        const double x = p_.exec[ti][static_cast<std::size_t>(q)];
        if (x == kInf) continue;
        if (!used_[static_cast<std::size_t>(q)]) {
          const int cls = p_.sym_class[static_cast<std::size_t>(q)];
          if (std::find(seen_classes.begin(), seen_classes.end(), cls) != seen_classes.end()) continue;
          seen_classes.push_back(cls);
        }
        const double start = std::max(avail_[static_cast<std::size_t>(q)], data_ready(t, q));
        if (start < last_start || (start == last_start && t < last_task)) continue;
        children.push_back({start + x, start, t, q});
      }
    }
    std::sort(children.begin(), children.end(), [](const Child& a, const Child& b) {
      if (a.finish != b.finish) return a.finish < b.finish;
      if (a.task != b.task) return a.task < b.task;
      return a.pe < b.pe;
    });

    for (const Child& c : children) {
      if (c.finish >= best_) continue;
      const auto ti = static_cast<std::size_t>(c.task);
      const auto qi = static_cast<std::size_t>(c.pe);
      const double saved_avail = avail_[qi];
      pe_of_[ti] = c.pe;
      start_[ti] = c.start;
      finish_[ti] = c.finish;
      avail_[qi] = c.finish;
      ++used_[qi];
      for (TaskId s : p_.succ[ti]) --pending_[static_cast<std::size_t>(s)];
      path_.push_back({c.task, c.pe, c.start, c.finish});
      dfs(c.start, c.task);
      path_.pop_back();
      for (TaskId s : p_.succ[ti]) ++pending_[static_cast<std::size_t>(s)];
      --used_[qi];
      avail_[qi] = saved_avail;
      pe_of_[ti] = -1;
      if (aborted_) return;
    }
  }

  const Problem& p_;
  ExactOptions opts_;
  std::vector<double> avail_;
  std::vector<int> used_;
  std::vector<PeId> pe_of_;
  std::vector<double> finish_;
  std::vector<double> start_;
  std::vector<int> pending_;
  std::vector<double> est_;
  std::vector<ScheduledTask> path_;
  double best_ = kInf;
  std::vector<ScheduledTask> best_schedule_;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
  std::chrono::steady_clock::time_point deadline_;
};

std::vector<ScheduledTask> etf_schedule(const ApplicationGraph& app, const ArchitectureGraph& arch, Objective objective) {
  ApplicationGraph g = app;
  g.app_id = 0;
  std::vector<ApplicationGraph> apps{g};
  FrameArrivalTrace trace;
  trace.arrivals.push_back({0.0, g.name, 0});
  EtfScheduler etf(objective);
  SimOptions opts;
  opts.measure_decisions = false;
  SimReport r = run_simulation(arch, apps, trace, etf, opts);
  std::vector<ScheduledTask> out;
  for (const auto& t : r.tasks) out.push_back({t.task_id, t.pe, t.start_us, t.finish_us});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.start_us < b.start_us; });
  return out;
}

}  // namespace

double makespan_of(const std::vector<ScheduledTask>& schedule) {
  double m = 0.0;
  for (const auto& s : schedule) m = std::max(m, s.finish_us);
  return m;
}

std::vector<ScheduledTask> list_schedule(const ApplicationGraph& app, const ArchitectureGraph& arch,
                                         const std::vector<std::pair<TaskId, PeId>>& sequence) {
  const auto n = app.size();
  std::vector<double> finish(n, 0.0);
  std::vector<PeId> pe_of(n, -1);
  std::vector<double> avail(arch.pe_count(), 0.0);
  std::vector<ScheduledTask> out;
  for (auto [t, q] : sequence) {
    if (t < 0 || static_cast<std::size_t>(t) >= n) throw ValidationError("task id out of range");
    const auto ti = static_cast<std::size_t>(t);
    if (pe_of[ti] >= 0) throw ValidationError("task scheduled twice");
    const auto& node = app.nodes[ti];
    const auto& pe = arch.pe(q);
    const TypeId type = arch.find_type(node.type);
    if (!pe.supports(type)) throw ValidationError("PE " + std::to_string(q) + " cannot run " + node.type);
    double ready = 0.0;
    double comm = 0.0;
    for (const auto& e : node.predecessors) {
      const auto pi = static_cast<std::size_t>(e.task);
      if (pe_of[pi] < 0) throw ValidationError("task " + std::to_string(t) + " placed before its predecessor");
      ready = std::max(ready, finish[pi]);
      comm = std::max(comm, comm_latency(arch, pe_of[pi], q, e.volume));
    }
    const double start = std::max(ready + comm, avail[static_cast<std::size_t>(q)]);
    finish[ti] = start + pe.cost(type).exec_us;
    pe_of[ti] = q;
    avail[static_cast<std::size_t>(q)] = finish[ti];
    out.push_back({t, q, start, finish[ti]});
  }
  return out;
}

double etf_single_frame_makespan(const ApplicationGraph& app, const ArchitectureGraph& arch, Objective objective) {
  return makespan_of(etf_schedule(app, arch, objective));
}

ExactResult exact_schedule(const ApplicationGraph& app, const ArchitectureGraph& arch, const ExactOptions& options) {
  Problem p = make_problem(app, arch);
  Search search(p, options);
  auto incumbent = etf_schedule(app, arch, Objective::performance);
  const double seed = makespan_of(incumbent);
  search.set_incumbent(seed, std::move(incumbent));
  return search.run();
}

}  // namespace ilsched
