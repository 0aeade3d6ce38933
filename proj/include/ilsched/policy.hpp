#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ilsched/dataset.hpp"
#include "ilsched/dtree.hpp"
#include "ilsched/features.hpp"
#include "ilsched/oracle.hpp"
#include "ilsched/simengine.hpp"

namespace ilsched {

struct PolicyParams {
  int cluster_depth = 12;
  int pe_depth = 12;
  int min_leaf = 4;
  // Starving multi-PE clusters get a constant policy instead of raising
  // InsufficientData (leave-one-out can remove every row of a cluster).
  bool allow_starving = false;
  ExecMode mode = ExecMode::parallel;
};

// Depth 12 for performance, 16 for the energy-aware objectives.
PolicyParams default_params(Objective objective);

// Level 1 picks a schema cluster, level 2 a PE position inside it. A missing
// PE tree means a constant policy (single-PE or starving cluster).
struct HierarchicalPolicy {
  FeatureSchema schema;
  Objective objective = Objective::performance;
  PolicyParams params;
  DecisionTree cluster_tree;
  std::vector<std::optional<DecisionTree>> pe_trees;  // per schema cluster
  std::vector<int> constant_pe;                       // used when pe_trees[c] is empty

  int predict_cluster(std::span<const double> x) const { return cluster_tree.predict(x); }
  int predict_pe_index(int cluster, std::span<const double> x) const;
};

struct FlatPolicy {
  FeatureSchema schema;
  Objective objective = Objective::performance;
  DecisionTree tree;  // global PE labels in schema order

  // (schema cluster, position inside it) of the predicted global label.
  std::pair<int, int> predict(std::span<const double> x) const;
};

// `rows` restricts training to a subset of dataset indices (all when null).
// Throws EmptyDataset, or InsufficientData naming the starving cluster.
HierarchicalPolicy train_hierarchical(const Dataset& dataset, Objective objective, const PolicyParams& params,
                                      const std::vector<std::size_t>* rows = nullptr);
FlatPolicy train_flat(const Dataset& dataset, Objective objective, int depth, int min_leaf = 4,
                      const std::vector<std::size_t>* rows = nullptr, ExecMode mode = ExecMode::parallel);

struct PolicyDecision {
  PeId pe = -1;
  int cluster = -1;   // schema cluster predicted at level 1
  int pe_index = -1;  // level-2 prediction
  bool fallback = false;
};

// Level-1/level-2 prediction mapped onto the extractor's platform. When the
// predicted PE is absent or cannot run the task: the capable PE of the same
// cluster with the earliest ready time, else ETF (performance) on the spot.
PolicyDecision policy_decide(const HierarchicalPolicy& policy, const FeatureExtractor& extractor, const SimState& state,
                             std::size_t ready_index);
PolicyDecision flat_decide(const FlatPolicy& policy, const FeatureExtractor& extractor, const SimState& state,
                           std::size_t ready_index);
// The fallback path alone, for a (schema cluster, position) prediction.
PolicyDecision resolve_prediction(const FeatureExtractor& extractor, const SimState& state, std::size_t ready_index,
                                  int cluster, int pe_index);

class IlScheduler : public Scheduler {
 public:
  IlScheduler(const HierarchicalPolicy& policy, const ArchitectureGraph& arch, std::string label = "il");
  std::string name() const override { return label_; }
  PeId decide(const SimState& state, const TaskInstance& task) override;
  std::size_t fallbacks() const override { return fallbacks_; }

 private:
  const HierarchicalPolicy* policy_;
  FeatureExtractor extractor_;
  std::string label_;
  std::size_t fallbacks_ = 0;
};

class FlatScheduler : public Scheduler {
 public:
  FlatScheduler(const FlatPolicy& policy, const ArchitectureGraph& arch);
  std::string name() const override { return "flat"; }
  PeId decide(const SimState& state, const TaskInstance& task) override;
  std::size_t fallbacks() const override { return fallbacks_; }

 private:
  const FlatPolicy* policy_;
  FeatureExtractor extractor_;
  std::size_t fallbacks_ = 0;
};

// Versioned JSON model files. Loading recomputes the schema hash and throws
// SchemaMismatch if it disagrees with the stored one.
std::string dump_policy(const HierarchicalPolicy& policy);
std::string dump_flat_policy(const FlatPolicy& policy);
HierarchicalPolicy load_policy(std::string_view document);
FlatPolicy load_flat_policy(std::string_view document);
// "hierarchical" or "flat".
std::string model_kind(std::string_view document);
// Throws SchemaMismatch unless the two schemas are identical.
void require_same_schema(const FeatureSchema& expected, const FeatureSchema& actual);

// Held-out accuracy over rows with role `both`.
struct AccuracyReport {
  std::size_t rows = 0;
  double cluster = 0.0;
  std::vector<double> pe;            // per schema cluster, over rows whose true cluster it is
  std::vector<std::size_t> pe_rows;  // rows behind each pe entry
  double composite = 0.0;            // both levels right
};

AccuracyReport evaluate_accuracy(const HierarchicalPolicy& policy, const Dataset& dataset, const std::vector<std::size_t>& rows);
double flat_accuracy(const FlatPolicy& policy, const Dataset& dataset, const std::vector<std::size_t>& rows);

}  // namespace ilsched
