#include "ilsched/appgraph.hpp"

#include <algorithm>
#include <json.hpp>
#include <queue>
#include <set>

#include "ilsched/error.hpp"
#include "ilsched/rng.hpp"
#include "ilsched/textio.hpp"

namespace ilsched {

using nlohmann::json;

std::vector<std::string> validate_dag(const ApplicationGraph& app) {
  std::vector<std::string> violations;
  const auto n = static_cast<int>(app.nodes.size());
  if (n == 0) {
    violations.push_back("graph has no nodes");
    return violations;
  }
  bool ids_ok = true;
  for (int i = 0; i < n; ++i) {
    const auto& node = app.nodes[static_cast<std::size_t>(i)];
    if (node.id != i) {
      violations.push_back("node at position " + std::to_string(i) + " has id " + std::to_string(node.id));
      ids_ok = false;
    }
    std::set<TaskId> seen;
    for (const auto& e : node.predecessors) {
      if (e.task < 0 || e.task >= n) {
        violations.push_back("node " + std::to_string(i) + " references unknown predecessor " + std::to_string(e.task));
        ids_ok = false;
      } else if (e.task == i) {
        violations.push_back("self-edge on node " + std::to_string(i));
        ids_ok = false;
      } else if (!seen.insert(e.task).second) {
        violations.push_back("duplicate edge " + std::to_string(e.task) + "->" + std::to_string(i));
      }
      if (!(e.volume >= 0.0)) violations.push_back("negative volume on edge into node " + std::to_string(i));
    }
  }
  if (!ids_ok) return violations;

  auto succ = successor_lists(app);
  std::vector<int> indeg(static_cast<std::size_t>(n));
  for (const auto& node : app.nodes) indeg[static_cast<std::size_t>(node.id)] = static_cast<int>(node.predecessors.size());
  std::vector<TaskId> stack;
  for (int i = 0; i < n; ++i) {
    if (indeg[static_cast<std::size_t>(i)] == 0) stack.push_back(i);
  }
  if (stack.empty()) violations.push_back("no source node");
  int visited = 0;
  while (!stack.empty()) {
    TaskId t = stack.back();
    stack.pop_back();
    ++visited;
    for (TaskId s : succ[static_cast<std::size_t>(t)]) {
      if (--indeg[static_cast<std::size_t>(s)] == 0) stack.push_back(s);
    }
  }
  if (visited != n) violations.push_back("cycle detected");
  bool has_terminal = std::any_of(succ.begin(), succ.end(), [](const auto& s) { return s.empty(); });
  if (!has_terminal) violations.push_back("no terminal node");
  return violations;
}

std::vector<std::vector<TaskId>> successor_lists(const ApplicationGraph& app) {
  std::vector<std::vector<TaskId>> succ(app.nodes.size());
  for (const auto& node : app.nodes) {
    for (const auto& e : node.predecessors) {
      if (e.task >= 0 && static_cast<std::size_t>(e.task) < succ.size()) succ[static_cast<std::size_t>(e.task)].push_back(node.id);
    }
  }
  return succ;
}

std::vector<TaskId> topological_order(const ApplicationGraph& app) {
  const auto succ = successor_lists(app);
  std::vector<int> indeg(app.nodes.size());
  for (const auto& node : app.nodes) indeg[static_cast<std::size_t>(node.id)] = static_cast<int>(node.predecessors.size());
  std::priority_queue<TaskId, std::vector<TaskId>, std::greater<>> ready;
  for (std::size_t i = 0; i < indeg.size(); ++i) {
    if (indeg[i] == 0) ready.push(static_cast<TaskId>(i));
  }
  std::vector<TaskId> order;
  while (!ready.empty()) {
    TaskId t = ready.top();
    ready.pop();
    order.push_back(t);
    for (TaskId s : succ[static_cast<std::size_t>(t)]) {
      if (--indeg[static_cast<std::size_t>(s)] == 0) ready.push(s);
    }
  }
  if (order.size() != app.nodes.size()) throw ValidationError(app.name + ": cycle detected");
  return order;
}

std::vector<int> downward_depths(const ApplicationGraph& app) {
  const auto order = topological_order(app);
  const auto succ = successor_lists(app);
  std::vector<int> depth(app.nodes.size(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    for (TaskId s : succ[static_cast<std::size_t>(*it)]) {
      depth[static_cast<std::size_t>(*it)] = std::max(depth[static_cast<std::size_t>(*it)], depth[static_cast<std::size_t>(s)] + 1);
    }
  }
  return depth;
}

int downward_depth(const ApplicationGraph& app, TaskId task) {
  if (task < 0 || static_cast<std::size_t>(task) >= app.nodes.size()) {
    throw UnknownTask("task " + std::to_string(task) + " not in " + app.name);
  }
  return downward_depths(app)[static_cast<std::size_t>(task)];
}

ApplicationGraph load_dag(std::string_view document) {
  ApplicationGraph app;
  try {
    json doc = json::parse(document);
    app.app_id = doc.at("app_id").get<int>();
    app.name = doc.at("name").get<std::string>();
    for (const auto& n : doc.at("nodes")) {
      TaskNode node;
      node.id = n.at("id").get<int>();
      node.type = n.at("type").get<std::string>();
      app.nodes.push_back(std::move(node));
    }
    std::sort(app.nodes.begin(), app.nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& e : doc.at("edges")) {
      int src = e.at("src").get<int>();
      int dst = e.at("dst").get<int>();
      if (dst < 0 || static_cast<std::size_t>(dst) >= app.nodes.size()) throw ParseError("edge into unknown node " + std::to_string(dst));
      app.nodes[static_cast<std::size_t>(dst)].predecessors.push_back({src, e.at("volume").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("DAG document: ") + e.what());
  }
  auto violations = validate_dag(app);
  if (!violations.empty()) throw ValidationError(app.name + ": " + violations.front());
  return app;
}

std::string dump_dag(const ApplicationGraph& app) {
  json doc;
  doc["format_version"] = 1;
  doc["app_id"] = app.app_id;
  doc["name"] = app.name;
  json nodes = json::array();
  json edges = json::array();
  for (const auto& node : app.nodes) {
    nodes.push_back({{"id", node.id}, {"type", node.type}});
    for (const auto& e : node.predecessors) edges.push_back({{"src", e.task}, {"dst", node.id}, {"volume", e.volume}});
  }
  doc["nodes"] = nodes;
  doc["edges"] = edges;
  return doc.dump(1) + "\n";
}

// ---- generator -----------------------------------------------------------------

ApplicationGraph generate_layered_dag(std::string name, AppId app_id, std::vector<std::string> types,
                                      const LayeredDagOptions& options) {
  if (types.empty()) throw ValidationError("layered DAG needs at least one node");
  Rng rng(options.seed);
  rng.shuffle(types);
  const int n = static_cast<int>(types.size());

  // Layer 0 is the single source.
  std::vector<std::vector<TaskId>> layers{{0}};
  int placed = 1;
  while (placed < n) {
    int width = static_cast<int>(rng.uniform_int(1, options.max_width));
    width = std::min(width, n - placed);
    std::vector<TaskId> layer;
    for (int k = 0; k < width; ++k) layer.push_back(placed++);
    layers.push_back(std::move(layer));
  }

  ApplicationGraph app;
  app.app_id = app_id;
  app.name = std::move(name);
  for (int i = 0; i < n; ++i) app.nodes.push_back({i, types[static_cast<std::size_t>(i)], {}});

  auto volume = [&] { return static_cast<double>(rng.uniform_int(options.min_volume, options.max_volume)); };
  std::vector<TaskId> earlier;  // all nodes in layers before the current one
  for (std::size_t l = 1; l < layers.size(); ++l) {
    const auto& prev = layers[l - 1];
    earlier.insert(earlier.end(), prev.begin(), prev.end());
    for (TaskId t : layers[l]) {
      auto& preds = app.nodes[static_cast<std::size_t>(t)].predecessors;
      TaskId first = prev[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(prev.size()) - 1))];
      preds.push_back({first, volume()});
      int fan_in = static_cast<int>(rng.uniform_int(1, options.max_fan_in));
      for (int k = 1; k < fan_in; ++k) {
        TaskId cand = earlier[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(earlier.size()) - 1))];
        bool dup = std::any_of(preds.begin(), preds.end(), [&](const PredEdge& e) { return e.task == cand; });
        if (!dup) preds.push_back({cand, volume()});
      }
    }
  }
  // Give dangling nodes of inner layers a successor in the next layer so every
  // node feeds the frame's output, as long as fan-in allows it.
  auto succ = successor_lists(app);
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    for (TaskId t : layers[l]) {
      if (!succ[static_cast<std::size_t>(t)].empty()) continue;
      for (TaskId cand : layers[l + 1]) {
        auto& preds = app.nodes[static_cast<std::size_t>(cand)].predecessors;
        if (static_cast<int>(preds.size()) < options.max_fan_in) {
          preds.push_back({t, volume()});
          succ[static_cast<std::size_t>(t)].push_back(cand);
          break;
        }
      }
    }
  }
  for (auto& node : app.nodes) {
    std::sort(node.predecessors.begin(), node.predecessors.end(), [](const auto& a, const auto& b) { return a.task < b.task; });
  }
  return app;
}

namespace {

struct SuiteEntry {
  const char* name;
  AppId app_id;
  std::vector<std::pair<const char*, int>> types;
  std::uint64_t seed;
  int max_width;
};

const std::vector<SuiteEntry>& suite_entries() {
  static const std::vector<SuiteEntry> entries = {
      {"WiFi-TX", 0,
       {{"scrambler", 3}, {"encoder", 3}, {"interleaver", 3}, {"qpsk_mod", 4}, {"pilot_insert", 3}, {"ifft", 5}, {"crc", 2}, {"bpsk_mod", 4}},
       101, 4},
      {"WiFi-RX", 1,
       {{"match_filter", 3}, {"fft", 5}, {"demod", 5}, {"deinterleaver", 5}, {"viterbi", 4}, {"descrambler", 4}, {"payload_extract", 4}, {"crc", 4}},
       102, 4},
      {"RangeDet", 2, {{"lfm_gen", 1}, {"fft", 2}, {"vector_mul", 1}, {"ifft", 1}, {"peak_detect", 1}, {"payload_extract", 1}}, 103, 3},
      {"SC-TX", 3, {{"scrambler", 1}, {"encoder", 2}, {"bpsk_mod", 2}, {"interleaver", 1}, {"crc", 1}, {"pilot_insert", 1}}, 104, 3},
      {"SC-RX", 4, {{"match_filter", 1}, {"demod", 2}, {"deinterleaver", 1}, {"viterbi", 2}, {"descrambler", 1}, {"crc", 1}}, 105, 3},
      {"TempMit", 5, {{"cov_est", 2}, {"matmul", 4}, {"mat_inverse", 2}, {"vector_mul", 1}, {"peak_detect", 1}}, 106, 3},
      {"PulseDoppler", 6, {{"fft", 192}, {"ifft", 128}, {"vector_mul", 43}, {"doppler_shift", 43}, {"peak_detect", 43}}, 107, 64},
  };
  return entries;
}

}  // namespace

const std::vector<std::string>& suite_app_names() {
  static const std::vector<std::string> names = {"WiFi-TX", "WiFi-RX", "RangeDet", "SC-TX", "SC-RX", "TempMit"};
  return names;
}

std::vector<std::string> builtin_app_names() {
  std::vector<std::string> names;
  for (const auto& e : suite_entries()) names.emplace_back(e.name);
  return names;
}

ApplicationGraph builtin_app(std::string_view name) {
  for (const auto& e : suite_entries()) {
    if (name != e.name) continue;
    std::vector<std::string> types;
    for (const auto& [type, count] : e.types) {
      for (int k = 0; k < count; ++k) types.emplace_back(type);
    }
    LayeredDagOptions opts;
    opts.seed = e.seed;
    opts.max_width = e.max_width;
    return generate_layered_dag(e.name, e.app_id, std::move(types), opts);
  }
  throw UnknownApp("no built-in application named '" + std::string(name) + "'");
}

std::vector<ApplicationGraph> builtin_suite() {
  std::vector<ApplicationGraph> apps;
  for (const auto& name : builtin_app_names()) apps.push_back(builtin_app(name));
  return apps;
}

// ---- workloads -------------------------------------------------------------------

int WorkloadSpec::total_frames() const {
  int total = 0;
  for (const auto& e : entries) total += e.frames;
  return total;
}

WorkloadSpec mixed_workload(double injection_rate, std::uint64_t seed) {
  WorkloadSpec spec;
  spec.entries = {{"WiFi-TX", 69}, {"WiFi-RX", 111}, {"RangeDet", 64}, {"SC-TX", 64}, {"SC-RX", 91}, {"TempMit", 101}};
  spec.injection_rate = injection_rate;
  spec.arrival_model = ArrivalModel::exponential;
  spec.seed = seed;
  return spec;
}

FrameArrivalTrace generate_trace(const WorkloadSpec& spec, std::span<const std::string> known_apps) {
  if (!(spec.injection_rate > 0.0)) throw ValidationError("injection rate must be positive");
  std::vector<std::string> frames;
  for (const auto& e : spec.entries) {
    if (std::find(known_apps.begin(), known_apps.end(), e.app) == known_apps.end()) {
      throw UnknownApp("workload references unknown application '" + e.app + "'");
    }
    if (e.frames <= 0) throw ValidationError("frame count for " + e.app + " must be positive");
    for (int k = 0; k < e.frames; ++k) frames.push_back(e.app);
  }
  Rng rng(spec.seed);
  rng.shuffle(frames);
  const double mean_gap_us = 1000.0 / spec.injection_rate;
  FrameArrivalTrace trace;
  double t = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (i > 0) t += spec.arrival_model == ArrivalModel::periodic ? mean_gap_us : rng.exponential(1.0 / mean_gap_us);
    trace.arrivals.push_back({t, frames[i], static_cast<FrameId>(i)});
  }
  return trace;
}

FrameArrivalTrace generate_trace(const WorkloadSpec& spec) {
  const auto names = builtin_app_names();
  return generate_trace(spec, names);
}

std::string dump_trace(const FrameArrivalTrace& trace) {
  std::string out = "# ilsched-trace format_version=1\ntime_us,app,frame_id\n";
  for (const auto& a : trace.arrivals) {
    out += textio::format_double(a.time_us);
    out += ',';
    out += a.app;
    out += ',';
    out += std::to_string(a.frame_id);
    out += '\n';
  }
  return out;
}

FrameArrivalTrace load_trace(std::string_view text) {
  FrameArrivalTrace trace;
  bool header_seen = false;
  for (auto raw : textio::split(text, '\n')) {
    auto line = textio::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "time_us,app,frame_id") throw ParseError("trace header must be 'time_us,app,frame_id'");
      header_seen = true;
      continue;
    }
    auto cols = textio::split(line, ',');
    if (cols.size() != 3) throw ParseError("trace line needs 3 columns: " + std::string(line));
    trace.arrivals.push_back({textio::parse_double(cols[0]), std::string(textio::trim(cols[1])), textio::parse_int(cols[2])});
  }
  for (std::size_t i = 1; i < trace.arrivals.size(); ++i) {
    if (trace.arrivals[i].time_us < trace.arrivals[i - 1].time_us) throw ValidationError("trace arrivals are not time-ordered");
  }
  std::set<FrameId> ids;
  for (const auto& a : trace.arrivals) {
    if (!ids.insert(a.frame_id).second) throw ValidationError("duplicate frame id " + std::to_string(a.frame_id));
  }
  return trace;
}

std::string dump_workload(const WorkloadSpec& spec) {
  json doc;
  doc["format_version"] = 1;
  json entries = json::array();
  for (const auto& e : spec.entries) entries.push_back({{"app", e.app}, {"frames", e.frames}});
  doc["entries"] = entries;
  doc["injection_rate"] = spec.injection_rate;
  doc["arrival_model"] = spec.arrival_model == ArrivalModel::periodic ? "periodic" : "exponential";
  doc["seed"] = spec.seed;
  return doc.dump(2) + "\n";
}

WorkloadSpec load_workload(std::string_view document) {
  WorkloadSpec spec;
  try {
    json doc = json::parse(document);
    for (const auto& e : doc.at("entries")) spec.entries.push_back({e.at("app").get<std::string>(), e.at("frames").get<int>()});
    spec.injection_rate = doc.value("injection_rate", 1.0);
    std::string model = doc.value("arrival_model", std::string("exponential"));
    if (model == "exponential") {
      spec.arrival_model = ArrivalModel::exponential;
    } else if (model == "periodic") {
      spec.arrival_model = ArrivalModel::periodic;
    } else {
      throw ParseError("unknown arrival model '" + model + "'");
    }
    spec.seed = doc.value("seed", std::uint64_t{1});
  } catch (const json::exception& e) {
    throw ParseError(std::string("workload document: ") + e.what());
  }
  return spec;
}

}  // namespace ilsched
