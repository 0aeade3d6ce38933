#pragma once

// Hand-built platforms and graphs, random decision states, and reference
// evaluators written independently of the library code they check.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "ilsched/experiment.hpp"

namespace fx {

using namespace ilsched;

struct ClusterDef {
  std::string name;
  int count = 1;
  std::map<std::string, std::pair<double, double>> profile;  // type -> (exec_us, power_mw)
};

inline ArchitectureGraph platform(const std::vector<std::string>& types, const std::vector<ClusterDef>& clusters,
                                  double intra = 0.0, double inter = 0.0, const std::string& name = "test") {
  nlohmann::json doc;
  doc["name"] = name;
  doc["task_types"] = types;
  for (const auto& c : clusters) {
    nlohmann::json cj;
    cj["name"] = c.name;
    cj["pe_count"] = c.count;
    for (const auto& [t, cost] : c.profile) cj["profile"][t] = {{"exec_us", cost.first}, {"power_mw", cost.second}};
    doc["clusters"].push_back(cj);
  }
  doc["links"] = {{"intra_cluster", intra}, {"inter_cluster", inter}};
  return load_platform(doc.dump());
}

// edges: (src, dst, volume)
inline ApplicationGraph app(const std::string& name, AppId id, const std::vector<std::string>& types,
                            const std::vector<std::tuple<int, int, double>>& edges) {
  ApplicationGraph g;
  g.name = name;
  g.app_id = id;
  for (std::size_t i = 0; i < types.size(); ++i) g.nodes.push_back({static_cast<TaskId>(i), types[i], {}});
  for (const auto& [s, d, v] : edges) g.nodes[static_cast<std::size_t>(d)].predecessors.push_back({s, v});
  return g;
}

// Seven tasks: 0 -> 1 -> {2, 3, 4} -> 5 -> 6.
inline ApplicationGraph fig1_app(const std::string& type = "t") {
  return app("fig1", 0, std::vector<std::string>(7, type),
             {{0, 1, 4}, {1, 2, 4}, {1, 3, 4}, {1, 4, 4}, {2, 5, 4}, {3, 5, 4}, {4, 5, 4}, {5, 6, 4}});
}

// Random DAG over `types`: node i draws up to three predecessors among
// lower ids, so node 0 is a source and the graph is acyclic.
inline ApplicationGraph random_dag(std::mt19937_64& rng, int n, const std::vector<std::string>& types,
                                   const std::string& name = "rand", AppId id = 0) {
  std::uniform_int_distribution<std::size_t> pick_type(0, types.size() - 1);
  std::uniform_real_distribution<double> vol(1.0, 20.0);
  std::vector<std::string> node_types;
  for (int i = 0; i < n; ++i) node_types.push_back(types[pick_type(rng)]);
  std::vector<std::tuple<int, int, double>> edges;
  for (int i = 1; i < n; ++i) {
    std::vector<int> cand(static_cast<std::size_t>(i));
    std::iota(cand.begin(), cand.end(), 0);
    std::shuffle(cand.begin(), cand.end(), rng);
    const int k = std::uniform_int_distribution<int>(0, std::min(3, i))(rng);
    for (int j = 0; j < k; ++j) edges.emplace_back(cand[static_cast<std::size_t>(j)], i, std::round(vol(rng)));
  }
  return app(name, id, node_types, edges);
}

// Three single-PE clusters with random speeds; every type runs somewhere,
// and roughly one (type, PE) pair in six is unsupported.
inline ArchitectureGraph random_three_pe(std::mt19937_64& rng, const std::vector<std::string>& types) {
  std::uniform_real_distribution<double> ex(5.0, 40.0);
  std::uniform_real_distribution<double> pw(100.0, 900.0);
  std::uniform_int_distribution<int> drop(0, 5);
  std::vector<ClusterDef> cl{{"A", 1, {}}, {"B", 1, {}}, {"C", 1, {}}};
  for (const auto& t : types) {
    const int keep = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int c = 0; c < 3; ++c) {
      if (c != keep && drop(rng) == 0) continue;
      cl[static_cast<std::size_t>(c)].profile[t] = {std::round(ex(rng) * 10) / 10, std::round(pw(rng))};
    }
  }
  const double inter = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return platform(types, cl, 0.0, std::round(inter * 100) / 100);
}

inline std::vector<PeId> capable_pes(const SimState& s, const TaskInstance& t) {
  std::vector<PeId> out;
  const TypeId type = s.type_of(t);
  for (const auto& pe : s.arch().pes) {
    if (pe.supports(type)) out.push_back(pe.id);
  }
  return out;
}

// A state reached by random arrivals and random capable dispatches, with
// some PE availabilities pushed into the future. The ready set is non-empty.
inline SimState random_state(const ArchitectureGraph& arch, std::span<const ApplicationGraph> apps,
                             std::mt19937_64& rng) {
  SimState s(arch, apps);
  std::uniform_int_distribution<std::size_t> pick_app(0, apps.size() - 1);
  const int frames = std::uniform_int_distribution<int>(1, 6)(rng);
  for (int f = 0; f < frames; ++f) {
    const double t = std::uniform_real_distribution<double>(0.0, 150.0)(rng);
    s.add_arrival(f, apps[pick_app(rng)].name, std::round(t));
  }
  const int steps = std::uniform_int_distribution<int>(0, 40)(rng);
  for (int k = 0; k < steps || s.ready().empty(); ++k) {
    if (s.ready().empty()) {
      if (!s.advance()) break;
      continue;
    }
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, s.ready().size() - 1)(rng);
    const auto pes = capable_pes(s, s.ready()[i]);
    s.dispatch(i, pes[std::uniform_int_distribution<std::size_t>(0, pes.size() - 1)(rng)]);
    if (s.ready().empty() && !s.advance()) break;
  }
  for (const auto& pe : arch.pes) {
    if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
      s.set_pe_ready_time(pe.id, s.now() + std::round(std::uniform_real_distribution<double>(0.0, 300.0)(rng)));
    }
  }
  if (s.ready().empty()) return random_state(arch, apps, rng);  // ran to completion; draw again
  return s;
}

struct RefChoice {
  std::size_t index = 0;
  PeId pe = -1;
  double cost = 0.0;
  double finish = 0.0;
};

// Exhaustive (task, PE) argmin from first principles: every candidate is
// materialized, then the list is sorted on the full tie-break key.
inline RefChoice reference_etf(const SimState& s, Objective obj) {
  const ArchitectureGraph& arch = s.arch();
  std::vector<std::tuple<double, double, PeId, std::size_t>> cands;
  for (std::size_t i = 0; i < s.ready().size(); ++i) {
    const TaskInstance& t = s.ready()[i];
    const TypeId type = s.app(t.app_id).type_ids[static_cast<std::size_t>(t.task_id)];
    for (const auto& pe : arch.pes) {
      if (!pe.supports(type)) continue;
      double comm = 0.0;
      for (const auto& p : t.preds) {
        if (p.pe != pe.id) comm = std::max(comm, arch.link_rates[static_cast<std::size_t>(p.pe) * arch.pes.size() +
                                                                 static_cast<std::size_t>(pe.id)] * p.volume);
      }
      const double start = std::max(s.pe_ready_time()[static_cast<std::size_t>(pe.id)], t.ready_time + comm);
      const double exec = pe.cost(type).exec_us;
      const double finish = start + exec;
      const double energy = exec * pe.cost(type).power_mw * 1e-3;
      const double span = finish - t.ready_time;
      double cost = finish;
      switch (obj) {
        case Objective::performance: cost = finish; break;
        case Objective::energy: cost = energy; break;
        case Objective::edp: cost = span * energy; break;
        case Objective::ed2p: cost = span * span * energy; break;
      }
      cands.emplace_back(cost, obj == Objective::performance ? 0.0 : finish, pe.id, i);
    }
  }
  std::sort(cands.begin(), cands.end());
  const auto& [cost, fin, pe, idx] = cands.front();
  (void)fin;
  RefChoice r;
  r.index = idx;
  r.pe = pe;
  r.cost = cost;
  return r;
}

// Minimum single-frame makespan by enumerating every topological order and
// every PE assignment, each scheduled without insertion. A task starts at
// max(PE free, last predecessor finish + largest incoming transfer).
inline double enumerate_makespan(const ApplicationGraph& g, const ArchitectureGraph& arch) {
  const int n = static_cast<int>(g.size());
  const auto m = static_cast<int>(arch.pes.size());
  std::vector<std::vector<double>> exec(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(m), -1));
  for (int t = 0; t < n; ++t) {
    const TypeId type = arch.find_type(g.nodes[static_cast<std::size_t>(t)].type);
    for (int q = 0; q < m; ++q) {
      const auto& pe = arch.pes[static_cast<std::size_t>(q)];
      if (pe.supports(type)) exec[static_cast<std::size_t>(t)][static_cast<std::size_t>(q)] = pe.cost(type).exec_us;
    }
  }
  std::vector<std::vector<int>> orders;
  std::vector<int> order;
  std::vector<bool> placed(static_cast<std::size_t>(n), false);
  std::function<void()> topo = [&] {
    if (static_cast<int>(order.size()) == n) {
      orders.push_back(order);
      return;
    }
    for (int t = 0; t < n; ++t) {
      if (placed[static_cast<std::size_t>(t)]) continue;
      bool ok = true;
      for (const auto& e : g.nodes[static_cast<std::size_t>(t)].predecessors) ok = ok && placed[static_cast<std::size_t>(e.task)];
      if (!ok) continue;
      placed[static_cast<std::size_t>(t)] = true;
      order.push_back(t);
      topo();
      order.pop_back();
      placed[static_cast<std::size_t>(t)] = false;
    }
  };
  topo();

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  std::function<void(int)> rec = [&](int t) {
    if (t == n) {
      for (const auto& ord : orders) {
        std::vector<double> avail(static_cast<std::size_t>(m), 0.0);
        std::vector<double> fin(static_cast<std::size_t>(n), 0.0);
        double span = 0.0;
        for (int task : ord) {
          const int q = assign[static_cast<std::size_t>(task)];
          double ready = 0.0;
          double comm = 0.0;
          for (const auto& e : g.nodes[static_cast<std::size_t>(task)].predecessors) {
            const int src = assign[static_cast<std::size_t>(e.task)];
            if (src != q) comm = std::max(comm, arch.link_rate(src, q) * e.volume);
            ready = std::max(ready, fin[static_cast<std::size_t>(e.task)]);
          }
          const double start = std::max(ready + comm, avail[static_cast<std::size_t>(q)]);
          fin[static_cast<std::size_t>(task)] = start + exec[static_cast<std::size_t>(task)][static_cast<std::size_t>(q)];
          avail[static_cast<std::size_t>(q)] = fin[static_cast<std::size_t>(task)];
          span = std::max(span, fin[static_cast<std::size_t>(task)]);
        }
        best = std::min(best, span);
      }
      return;
    }
    for (int q = 0; q < m; ++q) {
      if (exec[static_cast<std::size_t>(t)][static_cast<std::size_t>(q)] < 0) continue;
      assign[static_cast<std::size_t>(t)] = q;
      rec(t + 1);
    }
  };
  rec(0);
  return best;
}

// Longest edge-path from `task` to any terminal, by enumerating paths.
inline int enumerate_depth(const ApplicationGraph& g, TaskId task) {
  int best = 0;
  std::function<void(TaskId, int)> walk = [&](TaskId t, int len) {
    bool terminal = true;
    for (const auto& node : g.nodes) {
      for (const auto& e : node.predecessors) {
        if (e.task == t) {
          terminal = false;
          walk(node.id, len + 1);
        }
      }
    }
    if (terminal) best = std::max(best, len);
  };
  walk(task, 0);
  return best;
}

// Correct predictions of the best tree of depth <= 2 (any feature, any
// midpoint threshold, majority leaves) on a small dataset.
inline int best_depth2_correct(const std::vector<std::vector<double>>& x, const std::vector<int>& y, int classes) {
  const std::size_t f = x.empty() ? 0 : x[0].size();
  auto majority = [&](const std::vector<std::size_t>& idx) {
    std::vector<int> c(static_cast<std::size_t>(classes), 0);
    for (auto i : idx) ++c[static_cast<std::size_t>(y[i])];
    return *std::max_element(c.begin(), c.end());
  };
  auto thresholds = [&](const std::vector<std::size_t>& idx, std::size_t k) {
    std::vector<double> v;
    for (auto i : idx) v.push_back(x[i][k]);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<double> out;
    for (std::size_t i = 1; i < v.size(); ++i) out.push_back((v[i - 1] + v[i]) / 2);
    return out;
  };
  auto best_stump = [&](const std::vector<std::size_t>& idx) {
    int best = majority(idx);
    for (std::size_t k = 0; k < f; ++k) {
      for (double thr : thresholds(idx, k)) {
        std::vector<std::size_t> l, r;
        for (auto i : idx) (x[i][k] <= thr ? l : r).push_back(i);
        best = std::max(best, majority(l) + majority(r));
      }
    }
    return best;
  };
  std::vector<std::size_t> all(x.size());
  std::iota(all.begin(), all.end(), 0);
  int best = best_stump(all);
  for (std::size_t k = 0; k < f; ++k) {
    for (double thr : thresholds(all, k)) {
      std::vector<std::size_t> l, r;
      for (auto i : all) (x[i][k] <= thr ? l : r).push_back(i);
      best = std::max(best, best_stump(l) + best_stump(r));
    }
  }
  return best;
}

}  // namespace fx
