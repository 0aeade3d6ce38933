#pragma once

#include <cstdint>
#include <json.hpp>
#include <span>
#include <vector>

namespace ilsched {

// Dense row-major training matrix with integer class labels.
struct TrainingSet {
  std::size_t cols = 0;
  std::vector<double> x;
  std::vector<int> y;

  std::size_t rows() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
  void add(std::span<const double> features, int label);
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  int label = 0;
  std::vector<int> counts;  // per class, training rows reaching the node

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
  int max_depth = 12;
  int min_leaf = 4;

  bool operator==(const TreeParams&) const = default;
};

enum class ExecMode { serial, parallel };

class DecisionTree {
 public:
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t num_features = 0;
  int num_classes = 0;
  TreeParams params;

  // Throws SchemaMismatch when the input length differs from num_features.
  int predict(std::span<const double> x) const;
  int depth() const;
  std::size_t leaf_count() const;

  bool operator==(const DecisionTree&) const = default;
};

// A depth-0 tree that always answers `label`.
DecisionTree constant_tree(std::size_t num_features, int num_classes, int label);

// Greedy CART induction with Gini impurity, midpoint thresholds, and
// deterministic tie-breaking (lowest feature, then lowest threshold; leaf
// label is the majority class, ties to the smaller label). Both modes build
// identical trees; parallel spreads the per-feature split search over OpenMP
// threads. Throws EmptyDataset.
DecisionTree train_tree(const TrainingSet& data, int num_classes, const TreeParams& params,
                        ExecMode mode = ExecMode::parallel);

nlohmann::ordered_json tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const nlohmann::json& j);

}  // namespace ilsched
