#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ilsched/platform.hpp"
#include "ilsched/simengine.hpp"

namespace ilsched {

// Plain numeric state encoding; the owning FeatureSchema gives it meaning.
using FeatureVector = std::vector<double>;

inline constexpr double kSentinel = -1.0;

enum class FeatureKind { static_feature, dynamic_feature };

// Groups used for ablation masks. A feature belongs to exactly one group.
enum FeatureGroup : std::uint32_t {
  kGroupTaskIdentity = 1u << 0,  // task id, app id, app task count, downward depth
  kGroupExecTime = 1u << 1,
  kGroupPower = 1u << 2,
  kGroupPredIds = 1u << 3,
  kGroupReadyOrder = 1u << 4,
  kGroupPeAvailability = 1u << 5,  // per-cluster ready offsets and per-PE start offsets
  kGroupPredClusters = 1u << 6,
  kGroupPredVolumes = 1u << 7,
};

inline constexpr std::uint32_t kMaskStatic = kGroupTaskIdentity | kGroupExecTime | kGroupPower | kGroupPredIds;
inline constexpr std::uint32_t kMaskDynamic =
    kGroupReadyOrder | kGroupPeAvailability | kGroupPredClusters | kGroupPredVolumes;

struct FeatureSpec {
  std::string name;
  FeatureKind kind;
  FeatureGroup group;

  bool operator==(const FeatureSpec&) const = default;
};

struct SchemaOptions {
  // Adds, per PE, the earliest start of this task relative to now
  // (availability and incoming communication). The per-cluster features
  // cannot tell the PEs of one cluster apart; the PE-level trees need this.
  bool pe_local = false;
  std::uint32_t mask = 0;  // groups forced to zero
};

struct FeatureSchema {
  int pred_slots = 4;
  std::vector<std::string> cluster_names;
  std::vector<int> cluster_sizes;
  bool pe_local = false;
  std::uint32_t mask = 0;
  std::vector<FeatureSpec> features;

  std::size_t size() const { return features.size(); }
  int cluster_index(std::string_view name) const;
  bool operator==(const FeatureSchema&) const = default;
};

// Layout, static block first:
//   task_id, app_id, app_task_count, downward_depth,
//   exec[c] x|C|, power[c] x|C|, pred_id[k] x K,
//   ready_order, cluster_ready[c] x|C|, pred_cluster[k] x K, pred_volume[k] x K
// then, with pe_local, pe_start[c.j] for every PE. Without pe_local the
// length is 5 + 3|C| + 3K (32 on G1 with K = 4).
FeatureSchema feature_schema(const ArchitectureGraph& arch, int pred_slots, const SchemaOptions& options = {});

// Single-line text form used in dataset headers and model files.
std::string serialize_schema(const FeatureSchema& schema);
FeatureSchema parse_schema(std::string_view text);
std::uint64_t schema_hash(const FeatureSchema& schema);

// Encodes (state, ready task) into a FeatureVector. Bound to one platform;
// schema clusters are matched to platform clusters by name, so a schema
// built on one configuration can be evaluated on another (absent clusters
// and PE slots read as the sentinel).
class FeatureExtractor {
 public:
  FeatureExtractor(FeatureSchema schema, const ArchitectureGraph& arch);

  const FeatureSchema& schema() const { return schema_; }
  const ArchitectureGraph& arch() const { return *arch_; }
  // Platform cluster for a schema cluster index, -1 if absent.
  ClusterId arch_cluster(int schema_cluster) const { return schema_to_arch_[static_cast<std::size_t>(schema_cluster)]; }
  // Schema cluster index for a platform cluster, -1 if absent.
  int schema_cluster(ClusterId arch_cluster) const { return arch_to_schema_[static_cast<std::size_t>(arch_cluster)]; }

  FeatureVector extract(const SimState& state, std::size_t ready_index) const;
  // Throws TaskNotReady if the task is not in state.ready().
  FeatureVector extract(const SimState& state, const TaskInstance& task) const;
  void extract_into(const SimState& state, std::size_t ready_index, std::span<double> out) const;

 private:
  FeatureSchema schema_;
  const ArchitectureGraph* arch_;
  std::vector<ClusterId> schema_to_arch_;
  std::vector<int> arch_to_schema_;
  std::vector<PeId> slot_pe_;  // per schema PE slot, -1 when absent
};

// Predecessors kept in the K slots: largest volume first, then lower task id.
std::vector<PredEdge> slot_predecessors(const TaskNode& node, int pred_slots);

}  // namespace ilsched
