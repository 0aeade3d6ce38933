#include "ilsched/dtree.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "ilsched/error.hpp"

namespace ilsched {

void TrainingSet::add(std::span<const double> features, int label) {
  if (cols == 0 && y.empty()) cols = features.size();
  if (features.size() != cols) throw SchemaMismatch("training row has the wrong length");
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(label);
}

int DecisionTree::predict(std::span<const double> x) const {
  if (x.size() != num_features) {
    throw SchemaMismatch("tree expects " + std::to_string(num_features) + " features, got " + std::to_string(x.size()));
  }
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].label;
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    best = std::max(best, d[i]);
    if (!n.is_leaf()) {
      d[static_cast<std::size_t>(n.left)] = d[i] + 1;
      d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
}

DecisionTree constant_tree(std::size_t num_features, int num_classes, int label) {
  DecisionTree t;
  t.num_features = num_features;
  t.num_classes = num_classes;
  t.params.max_depth = 0;
  TreeNode leaf;
  leaf.label = label;
  leaf.counts.assign(static_cast<std::size_t>(num_classes), 0);
  t.nodes.push_back(leaf);
  return t;
}

namespace {

struct Split {
  bool valid = false;
  double impurity = 0.0;  // weighted Gini, lower is better
  int feature = -1;
  double threshold = 0.0;
  std::size_t left_count = 0;
};

// Presorted CART: order[f] holds row ids sorted by feature f; each node owns
// the same [lo, hi) range in every order[f], kept sorted by stable
// partitioning after each split.
class Builder {
 public:
  Builder(const TrainingSet& d, int k, const TreeParams& p, ExecMode mode)
      : data_(d), k_(k), params_(p), mode_(mode), order_(d.cols), goes_left_(d.rows(), 0), scratch_(d.cols) {
    const std::size_t n = d.rows();
    const auto fcount = static_cast<std::int64_t>(d.cols);
#pragma omp parallel for schedule(dynamic) if (mode == ExecMode::parallel)
    for (std::int64_t fi = 0; fi < fcount; ++fi) {
      const auto f = static_cast<std::size_t>(fi);
      auto& o = order_[f];
      o.resize(n);
      std::iota(o.begin(), o.end(), 0u);
      std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return value(a, f) < value(b, f); });
      scratch_[f].resize(n);
    }
  }

  DecisionTree build() {
    DecisionTree t;
    t.num_features = data_.cols;
    t.num_classes = k_;
    t.params = params_;
    tree_ = &t;
    grow(0, data_.rows(), 0);
    return t;
  }

 private:
  double value(std::uint32_t row, std::size_t f) const { return data_.x[row * data_.cols + f]; }
  int label(std::uint32_t row) const { return data_.y[row]; }

  Split best_for_feature(std::size_t f, std::size_t lo, std::size_t hi, const std::vector<int>& total) const {
    Split best;
    const auto& o = order_[f];
    const std::size_t n = hi - lo;
    std::vector<std::int64_t> left(static_cast<std::size_t>(k_), 0);
    // Sums of squared class counts on each side; Gini impurity weighted by
    // size is n - sq/n per side.
    std::int64_t sq_left = 0;
    std::int64_t sq_right = 0;
    for (int c : total) sq_right += static_cast<std::int64_t>(c) * c;
    const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_leaf));
    for (std::size_t i = lo; i + 1 < hi; ++i) {
      const auto y = static_cast<std::size_t>(label(o[i]));
      const std::int64_t l = left[y];
      const std::int64_t r = total[y] - l;
      sq_left += 2 * l + 1;
      sq_right -= 2 * r - 1;
      left[y] = l + 1;
      const std::size_t nl = i - lo + 1;
      const std::size_t nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double a = value(o[i], f);
      const double b = value(o[i + 1], f);
      if (!(a < b)) continue;
      const double impurity = (static_cast<double>(nl) - static_cast<double>(sq_left) / static_cast<double>(nl)) +
                              (static_cast<double>(nr) - static_cast<double>(sq_right) / static_cast<double>(nr));
      if (!best.valid || impurity < best.impurity) {
        double thr = a + (b - a) / 2.0;
        if (!(thr < b)) thr = a;
        best = {true, impurity, static_cast<int>(f), thr, nl};
      }
    }
    return best;
  }

  int grow(std::size_t lo, std::size_t hi, int depth) {
    const int id = static_cast<int>(tree_->nodes.size());
    tree_->nodes.emplace_back();
    std::vector<int> counts(static_cast<std::size_t>(k_), 0);
    for (std::size_t i = lo; i < hi; ++i) ++counts[static_cast<std::size_t>(label(order_[0][i]))];
    int majority = 0;
    for (int c = 1; c < k_; ++c) {
      if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(majority)]) majority = c;
    }
    {
      auto& node = tree_->nodes[static_cast<std::size_t>(id)];
      node.counts = counts;
      node.label = majority;
    }
    const std::size_t n = hi - lo;
    const bool pure = counts[static_cast<std::size_t>(majority)] == static_cast<int>(n);
    if (pure || depth >= params_.max_depth || n < 2 * static_cast<std::size_t>(std::max(1, params_.min_leaf))) return id;

    const std::size_t nf = data_.cols;
    std::vector<Split> per_feature(nf);
    const auto fcount = static_cast<std::int64_t>(nf);
#pragma omp parallel for schedule(dynamic) if (mode_ == ExecMode::parallel && n >= 512)
    for (std::int64_t fi = 0; fi < fcount; ++fi) {
      per_feature[static_cast<std::size_t>(fi)] = best_for_feature(static_cast<std::size_t>(fi), lo, hi, counts);
    }
    Split best;
    for (const auto& s : per_feature) {
      if (s.valid && (!best.valid || s.impurity < best.impurity)) best = s;
    }
    // Zero-gain splits are still taken: an impure node may need two levels
    // (XOR-like data) before impurity drops.
    if (!best.valid) return id;

    const auto bf = static_cast<std::size_t>(best.feature);
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint32_t r = order_[bf][i];
      goes_left_[r] = value(r, bf) <= best.threshold ? 1 : 0;
    }
#pragma omp parallel for schedule(static) if (mode_ == ExecMode::parallel && n >= 512)
    for (std::int64_t fi = 0; fi < fcount; ++fi) {
      auto& o = order_[static_cast<std::size_t>(fi)];
      auto& tmp = scratch_[static_cast<std::size_t>(fi)];
      std::size_t w = lo;
      std::size_t t = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        if (goes_left_[o[i]]) {
          o[w++] = o[i];
        } else {
          tmp[t++] = o[i];
        }
      }
      std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(t), o.begin() + static_cast<std::ptrdiff_t>(w));
    }
    const std::size_t mid = lo + best.left_count;
    const int left = grow(lo, mid, depth + 1);
    const int right = grow(mid, hi, depth + 1);
    auto& node = tree_->nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  const TrainingSet& data_;
  int k_;
  TreeParams params_;
  ExecMode mode_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::vector<std::uint32_t>> scratch_;
  DecisionTree* tree_ = nullptr;
};

}  // namespace

DecisionTree train_tree(const TrainingSet& data, int num_classes, const TreeParams& params, ExecMode mode) {
  if (data.rows() == 0) throw EmptyDataset("cannot train a tree on zero rows");
  if (num_classes < 1) throw ValidationError("num_classes must be positive");
  for (int y : data.y) {
    if (y < 0 || y >= num_classes) throw ValidationError("label " + std::to_string(y) + " outside [0, num_classes)");
  }
  if (data.cols == 0) {
    std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
    for (int y : data.y) ++counts[static_cast<std::size_t>(y)];
    auto t = constant_tree(0, num_classes, static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin()));
    t.nodes[0].counts = counts;
    t.params = params;
    return t;
  }
  return Builder(data, num_classes, params, mode).build();
}

nlohmann::ordered_json tree_to_json(const DecisionTree& t) {
  nlohmann::ordered_json j;
  j["num_features"] = t.num_features;
  j["num_classes"] = t.num_classes;
  j["max_depth"] = t.params.max_depth;
  j["min_leaf"] = t.params.min_leaf;
  auto& arr = j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : t.nodes) {
    if (n.is_leaf()) {
      arr.push_back({{"label", n.label}, {"counts", n.counts}});
    } else {
      arr.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                     {"label", n.label}, {"counts", n.counts}});
    }
  }
  return j;
}

DecisionTree tree_from_json(const nlohmann::json& j) {
  try {
    DecisionTree t;
    t.num_features = j.at("num_features").get<std::size_t>();
    t.num_classes = j.at("num_classes").get<int>();
    t.params.max_depth = j.at("max_depth").get<int>();
    t.params.min_leaf = j.at("min_leaf").get<int>();
    for (const auto& jn : j.at("nodes")) {
      TreeNode n;
      n.label = jn.at("label").get<int>();
      n.counts = jn.at("counts").get<std::vector<int>>();
      if (jn.contains("feature")) {
        n.feature = jn.at("feature").get<int>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
      }
      t.nodes.push_back(std::move(n));
    }
    const int count = static_cast<int>(t.nodes.size());
    if (count == 0) throw ParseError("tree has no nodes");
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) continue;
      if (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count ||
          n.feature >= static_cast<int>(t.num_features)) {
        throw ParseError("tree node references are out of range");
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed tree: ") + e.what());
  }
}

}  // namespace ilsched
