#include "ilsched/features.hpp"

#include <algorithm>
#include <cstdlib>

#include "ilsched/error.hpp"
#include "ilsched/textio.hpp"

namespace ilsched {

int FeatureSchema::cluster_index(std::string_view name) const {
  for (std::size_t i = 0; i < cluster_names.size(); ++i) {
    if (cluster_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

void build_feature_list(FeatureSchema& s) {
  using K = FeatureKind;
  auto add = [&](std::string name, K kind, FeatureGroup group) { s.features.push_back({std::move(name), kind, group}); };
  const auto& cn = s.cluster_names;
  const int k = s.pred_slots;

  add("task_id", K::static_feature, kGroupTaskIdentity);
  add("app_id", K::static_feature, kGroupTaskIdentity);
  add("app_task_count", K::static_feature, kGroupTaskIdentity);
  add("downward_depth", K::static_feature, kGroupTaskIdentity);
  for (const auto& c : cn) add("exec[" + c + "]", K::static_feature, kGroupExecTime);
  for (const auto& c : cn) add("power[" + c + "]", K::static_feature, kGroupPower);
  for (int i = 0; i < k; ++i) add("pred_id[" + std::to_string(i) + "]", K::static_feature, kGroupPredIds);

  add("ready_order", K::dynamic_feature, kGroupReadyOrder);
  for (const auto& c : cn) add("cluster_ready[" + c + "]", K::dynamic_feature, kGroupPeAvailability);
  for (int i = 0; i < k; ++i) add("pred_cluster[" + std::to_string(i) + "]", K::dynamic_feature, kGroupPredClusters);
  for (int i = 0; i < k; ++i) add("pred_volume[" + std::to_string(i) + "]", K::dynamic_feature, kGroupPredVolumes);

  if (s.pe_local) {
    for (std::size_t c = 0; c < cn.size(); ++c) {
      for (int j = 0; j < s.cluster_sizes[c]; ++j) {
        add("pe_start[" + cn[c] + "." + std::to_string(j) + "]", K::dynamic_feature, kGroupPeAvailability);
      }
    }
  }
}

}  // namespace

FeatureSchema feature_schema(const ArchitectureGraph& arch, int pred_slots, const SchemaOptions& options) {
  if (pred_slots < 1) throw ValidationError("pred_slots must be at least 1");
  FeatureSchema s;
  s.pred_slots = pred_slots;
  s.pe_local = options.pe_local;
  s.mask = options.mask;
  for (const auto& c : arch.clusters) {
    s.cluster_names.push_back(c.name);
    s.cluster_sizes.push_back(static_cast<int>(c.pe_ids.size()));
  }
  build_feature_list(s);
  return s;
}

std::string serialize_schema(const FeatureSchema& s) {
  std::string out = "pred_slots=" + std::to_string(s.pred_slots) + " pe_local=" + (s.pe_local ? "1" : "0") +
                    " mask=" + std::to_string(s.mask) + " clusters=";
  for (std::size_t i = 0; i < s.cluster_names.size(); ++i) {
    if (i) out += ',';
    out += s.cluster_names[i] + ':' + std::to_string(s.cluster_sizes[i]);
  }
  return out;
}

FeatureSchema parse_schema(std::string_view text) {
  FeatureSchema s;
  bool have_slots = false;
  bool have_clusters = false;
  for (auto field : textio::split(textio::trim(text), ' ')) {
    if (field.empty()) continue;
    auto eq = field.find('=');
    if (eq == std::string_view::npos) throw ParseError("bad schema field '" + std::string(field) + "'");
    auto key = field.substr(0, eq);
    auto value = field.substr(eq + 1);
    if (key == "pred_slots") {
      s.pred_slots = static_cast<int>(textio::parse_int(value));
      have_slots = true;
    } else if (key == "pe_local") {
      s.pe_local = value == "1";
    } else if (key == "mask") {
      s.mask = static_cast<std::uint32_t>(textio::parse_int(value));
    } else if (key == "clusters") {
      for (auto item : textio::split(value, ',')) {
        auto colon = item.rfind(':');
        if (colon == std::string_view::npos) throw ParseError("bad cluster entry in schema");
        s.cluster_names.emplace_back(item.substr(0, colon));
        s.cluster_sizes.push_back(static_cast<int>(textio::parse_int(item.substr(colon + 1))));
      }
      have_clusters = true;
    }
  }
  if (!have_slots || !have_clusters || s.pred_slots < 1) throw ParseError("schema needs pred_slots and clusters");
  build_feature_list(s);
  return s;
}

std::uint64_t schema_hash(const FeatureSchema& schema) {
  std::string canon = serialize_schema(schema) + "|";
  for (const auto& f : schema.features) canon += f.name + ";";
  return textio::fnv1a(canon);
}

std::vector<PredEdge> slot_predecessors(const TaskNode& node, int pred_slots) {
  std::vector<PredEdge> preds = node.predecessors;
  std::sort(preds.begin(), preds.end(), [](const PredEdge& a, const PredEdge& b) {
    if (a.volume != b.volume) return a.volume > b.volume;
    return a.task < b.task;
  });
  if (preds.size() > static_cast<std::size_t>(pred_slots)) preds.resize(static_cast<std::size_t>(pred_slots));
  return preds;
}

FeatureExtractor::FeatureExtractor(FeatureSchema schema, const ArchitectureGraph& arch)
    : schema_(std::move(schema)), arch_(&arch) {
  schema_to_arch_.assign(schema_.cluster_names.size(), -1);
  arch_to_schema_.assign(arch.cluster_count(), -1);
  for (std::size_t i = 0; i < schema_.cluster_names.size(); ++i) {
    ClusterId c = arch.find_cluster(schema_.cluster_names[i]);
    schema_to_arch_[i] = c;
    if (c >= 0) arch_to_schema_[static_cast<std::size_t>(c)] = static_cast<int>(i);
  }
  if (schema_.pe_local) {
    for (std::size_t i = 0; i < schema_.cluster_names.size(); ++i) {
      for (int j = 0; j < schema_.cluster_sizes[i]; ++j) {
        PeId pe = -1;
        ClusterId c = schema_to_arch_[i];
        if (c >= 0) {
          const auto& ids = arch.clusters[static_cast<std::size_t>(c)].pe_ids;
          if (static_cast<std::size_t>(j) < ids.size()) pe = ids[static_cast<std::size_t>(j)];
        }
        slot_pe_.push_back(pe);
      }
    }
  }
}

FeatureVector FeatureExtractor::extract(const SimState& state, std::size_t ready_index) const {
  FeatureVector out(schema_.size());
  extract_into(state, ready_index, out);
  return out;
}

FeatureVector FeatureExtractor::extract(const SimState& state, const TaskInstance& task) const {
  const auto& ready = state.ready();
  for (std::size_t i = 0; i < ready.size(); ++i) {
    if (ready[i].frame_id == task.frame_id && ready[i].task_id == task.task_id) return extract(state, i);
  }
  throw TaskNotReady("frame " + std::to_string(task.frame_id) + " task " + std::to_string(task.task_id) + " is not ready");
}

void FeatureExtractor::extract_into(const SimState& state, std::size_t ready_index, std::span<double> out) const {
  if (ready_index >= state.ready().size()) throw TaskNotReady("ready index out of range");
  if (out.size() != schema_.size()) throw SchemaMismatch("output span does not match schema length");
  const TaskInstance& task = state.ready()[ready_index];
  const AppInfo& info = state.app(task.app_id);
  const TaskNode& node = info.graph.nodes[static_cast<std::size_t>(task.task_id)];
  const TypeId type = info.type_ids[static_cast<std::size_t>(task.task_id)];
  const std::size_t nc = schema_.cluster_names.size();
  const auto k = static_cast<std::size_t>(schema_.pred_slots);
  const auto pe_ready = state.pe_ready_time();
  const double now = state.now();
  auto offset = [&](PeId pe) { return std::max(0.0, pe_ready[static_cast<std::size_t>(pe)] - now); };

  std::size_t i = 0;
  out[i++] = task.task_id;
  out[i++] = task.app_id;
  out[i++] = static_cast<double>(info.graph.size());
  out[i++] = info.depth[static_cast<std::size_t>(task.task_id)];
  for (std::size_t c = 0; c < nc; ++c) {
    ClusterId ac = schema_to_arch_[c];
    const ProcessingElement* pe = ac >= 0 ? &arch_->pe(arch_->clusters[static_cast<std::size_t>(ac)].pe_ids.front()) : nullptr;
    out[i + c] = pe && pe->supports(type) ? pe->cost(type).exec_us : kSentinel;
    out[i + nc + c] = pe && pe->supports(type) ? pe->cost(type).power_mw : kSentinel;
  }
  i += 2 * nc;
  const auto slots = slot_predecessors(node, schema_.pred_slots);
  for (std::size_t s = 0; s < k; ++s) out[i + s] = s < slots.size() ? slots[s].task : kSentinel;
  i += k;

  out[i++] = static_cast<double>(ready_index);
  for (std::size_t c = 0; c < nc; ++c) {
    ClusterId ac = schema_to_arch_[c];
    if (ac < 0) {
      out[i + c] = kSentinel;
      continue;
    }
    double best = -1.0;
    for (PeId pe : arch_->clusters[static_cast<std::size_t>(ac)].pe_ids) {
      double o = offset(pe);
      if (best < 0.0 || o < best) best = o;
    }
    out[i + c] = best;
  }
  i += nc;
  for (std::size_t s = 0; s < k; ++s) {
    double cluster = kSentinel;
    double volume = kSentinel;
    if (s < slots.size()) {
      for (const auto& p : task.preds) {
        if (p.task != slots[s].task) continue;
        int sc = arch_to_schema_[static_cast<std::size_t>(arch_->pe(p.pe).cluster_id)];
        cluster = sc;
        volume = p.volume;
      }
    }
    out[i + s] = cluster;
    out[i + k + s] = volume;
  }
  i += 2 * k;

  if (schema_.pe_local) {
    for (std::size_t s = 0; s < slot_pe_.size(); ++s) {
      const PeId pe = slot_pe_[s];
      const bool usable = pe >= 0 && arch_->pe(pe).supports(type);
      out[i + s] = usable ? std::max(0.0, state.earliest_start(task, pe) - now) : kSentinel;
    }
    i += slot_pe_.size();
  }

  if (schema_.mask != 0) {
    for (std::size_t f = 0; f < schema_.features.size(); ++f) {
      if (schema_.mask & schema_.features[f].group) out[f] = 0.0;
    }
  }
}

}  // namespace ilsched
