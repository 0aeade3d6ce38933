#include "ilsched/policy.hpp"

#include <algorithm>
#include <json.hpp>

#include "ilsched/error.hpp"
#include "ilsched/textio.hpp"

namespace ilsched {

PolicyParams default_params(Objective objective) {
  PolicyParams p;
  if (objective != Objective::performance) {
    p.cluster_depth = 16;
    p.pe_depth = 16;
  }
  return p;
}

int HierarchicalPolicy::predict_pe_index(int cluster, std::span<const double> x) const {
  const auto c = static_cast<std::size_t>(cluster);
  if (pe_trees[c]) return pe_trees[c]->predict(x);
  return constant_pe[c];
}

std::pair<int, int> FlatPolicy::predict(std::span<const double> x) const {
  int label = tree.predict(x);
  for (std::size_t c = 0; c < schema.cluster_sizes.size(); ++c) {
    if (label < schema.cluster_sizes[c]) return {static_cast<int>(c), label};
    label -= schema.cluster_sizes[c];
  }
  throw SchemaMismatch("flat label outside the schema");
}

namespace {

bool trains_cluster(RowRole r) { return r != RowRole::pe_only; }
bool trains_pe(RowRole r) { return r != RowRole::cluster_only; }

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> v(d.rows.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

}  // namespace

HierarchicalPolicy train_hierarchical(const Dataset& d, Objective objective, const PolicyParams& params,
                                      const std::vector<std::size_t>* rows) {
  const std::vector<std::size_t> everything = rows ? std::vector<std::size_t>{} : all_rows(d);
  const auto& idx = rows ? *rows : everything;
  const std::size_t nc = d.schema.cluster_names.size();

  HierarchicalPolicy p;
  p.schema = d.schema;
  p.objective = objective;
  p.params = params;

  TrainingSet cluster_set;
  cluster_set.cols = d.schema.size();
  std::vector<TrainingSet> pe_sets(nc);
  for (auto& s : pe_sets) s.cols = d.schema.size();
  for (std::size_t i : idx) {
    const auto& r = d.rows[i];
    if (trains_cluster(r.role)) cluster_set.add(r.x, r.cluster);
    if (trains_pe(r.role)) pe_sets[static_cast<std::size_t>(r.cluster)].add(r.x, r.pe_index);
  }
  if (cluster_set.rows() == 0) throw EmptyDataset("no rows to train the cluster policy");
  p.cluster_tree = train_tree(cluster_set, static_cast<int>(nc), {params.cluster_depth, params.min_leaf}, params.mode);

  p.pe_trees.resize(nc);
  p.constant_pe.assign(nc, 0);
  for (std::size_t c = 0; c < nc; ++c) {
    const int size = d.schema.cluster_sizes[c];
    if (size <= 1) continue;
    const auto& set = pe_sets[c];
    if (set.rows() < static_cast<std::size_t>(std::max(1, params.min_leaf))) {
      if (!params.allow_starving) {
        throw InsufficientData("cluster " + d.schema.cluster_names[c] + " has " + std::to_string(set.rows()) +
                               " rows, needs " + std::to_string(params.min_leaf));
      }
      if (set.rows() > 0) {
        std::vector<int> counts(static_cast<std::size_t>(size), 0);
        for (int y : set.y) ++counts[static_cast<std::size_t>(y)];
        p.constant_pe[c] = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      }
      continue;
    }
    p.pe_trees[c] = train_tree(set, size, {params.pe_depth, params.min_leaf}, params.mode);
  }
  return p;
}

FlatPolicy train_flat(const Dataset& d, Objective objective, int depth, int min_leaf, const std::vector<std::size_t>* rows,
                      ExecMode mode) {
  const std::vector<std::size_t> everything = rows ? std::vector<std::size_t>{} : all_rows(d);
  const auto& idx = rows ? *rows : everything;
  TrainingSet set;
  set.cols = d.schema.size();
  for (std::size_t i : idx) {
    if (d.rows[i].role == RowRole::both) set.add(d.rows[i].x, d.flat_label(d.rows[i]));
  }
  FlatPolicy p;
  p.schema = d.schema;
  p.objective = objective;
  p.tree = train_tree(set, d.flat_classes(), {depth, min_leaf}, mode);
  return p;
}

PolicyDecision resolve_prediction(const FeatureExtractor& ex, const SimState& state, std::size_t ready_index, int cluster,
                                  int pe_index) {
  PolicyDecision d;
  d.cluster = cluster;
  d.pe_index = pe_index;
  const ArchitectureGraph& arch = ex.arch();
  const TypeId type = state.type_of(state.ready()[ready_index]);
  const ClusterId ac = ex.arch_cluster(cluster);
  if (ac >= 0) {
    const auto& ids = arch.clusters[static_cast<std::size_t>(ac)].pe_ids;
    if (pe_index >= 0 && static_cast<std::size_t>(pe_index) < ids.size() &&
        arch.pe(ids[static_cast<std::size_t>(pe_index)]).supports(type)) {
      d.pe = ids[static_cast<std::size_t>(pe_index)];
      return d;
    }
    d.fallback = true;
    const auto ready = state.pe_ready_time();
    for (PeId q : ids) {
      if (!arch.pe(q).supports(type)) continue;
      if (d.pe < 0 || ready[static_cast<std::size_t>(q)] < ready[static_cast<std::size_t>(d.pe)]) d.pe = q;
    }
    if (d.pe >= 0) return d;
  }
  d.fallback = true;
  d.pe = etf_best_for_task(state, ready_index, Objective::performance).pe;
  return d;
}

PolicyDecision policy_decide(const HierarchicalPolicy& policy, const FeatureExtractor& ex, const SimState& state,
                             std::size_t ready_index) {
  const FeatureVector x = ex.extract(state, ready_index);
  const int c = policy.predict_cluster(x);
  const int j = policy.predict_pe_index(c, x);
  return resolve_prediction(ex, state, ready_index, c, j);
}

PolicyDecision flat_decide(const FlatPolicy& policy, const FeatureExtractor& ex, const SimState& state,
                           std::size_t ready_index) {
  const FeatureVector x = ex.extract(state, ready_index);
  auto [c, j] = policy.predict(x);
  return resolve_prediction(ex, state, ready_index, c, j);
}

IlScheduler::IlScheduler(const HierarchicalPolicy& policy, const ArchitectureGraph& arch, std::string label)
    : policy_(&policy), extractor_(policy.schema, arch), label_(std::move(label)) {}

PeId IlScheduler::decide(const SimState& state, const TaskInstance& task) {
  auto d = policy_decide(*policy_, extractor_, state, ready_index_of(state, task));
  if (d.fallback) ++fallbacks_;
  return d.pe;
}

FlatScheduler::FlatScheduler(const FlatPolicy& policy, const ArchitectureGraph& arch)
    : policy_(&policy), extractor_(policy.schema, arch) {}

PeId FlatScheduler::decide(const SimState& state, const TaskInstance& task) {
  auto d = flat_decide(*policy_, extractor_, state, ready_index_of(state, task));
  if (d.fallback) ++fallbacks_;
  return d.pe;
}

// ---- model files -----------------------------------------------------------------

namespace {

using ojson = nlohmann::ordered_json;

ojson header(std::string_view kind, const FeatureSchema& schema, Objective objective) {
  ojson j;
  j["format_version"] = 1;
  j["kind"] = kind;
  j["objective"] = objective_name(objective);
  j["schema"] = serialize_schema(schema);
  j["schema_hash"] = textio::hex64(schema_hash(schema));
  return j;
}

nlohmann::json parse_model(std::string_view doc, std::string_view kind, FeatureSchema& schema, Objective& objective) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != 1) throw ParseError("unsupported model format version");
    if (j.at("kind").get<std::string>() != kind) throw ParseError("model kind is not " + std::string(kind));
    objective = parse_objective(j.at("objective").get<std::string>());
    schema = parse_schema(j.at("schema").get<std::string>());
    if (textio::hex64(schema_hash(schema)) != j.at("schema_hash").get<std::string>()) {
      throw SchemaMismatch("model schema hash does not match its schema");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  }
  return j;
}

void check_tree(const DecisionTree& t, const FeatureSchema& schema) {
  if (t.num_features != schema.size()) throw SchemaMismatch("tree feature count does not match the model schema");
}

}  // namespace

std::string dump_policy(const HierarchicalPolicy& p) {
  ojson j = header("hierarchical", p.schema, p.objective);
  j["params"] = {{"cluster_depth", p.params.cluster_depth}, {"pe_depth", p.params.pe_depth}, {"min_leaf", p.params.min_leaf},
                 {"allow_starving", p.params.allow_starving}};
  j["cluster_tree"] = tree_to_json(p.cluster_tree);
  auto& pe = j["pe_policies"] = ojson::array();
  for (std::size_t c = 0; c < p.pe_trees.size(); ++c) {
    ojson entry;
    entry["cluster"] = p.schema.cluster_names[c];
    if (p.pe_trees[c]) {
      entry["tree"] = tree_to_json(*p.pe_trees[c]);
    } else {
      entry["constant"] = p.constant_pe[c];
    }
    pe.push_back(std::move(entry));
  }
  return j.dump(1) + "\n";
}

std::string dump_flat_policy(const FlatPolicy& p) {
  ojson j = header("flat", p.schema, p.objective);
  j["tree"] = tree_to_json(p.tree);
  return j.dump(1) + "\n";
}

HierarchicalPolicy load_policy(std::string_view doc) {
  HierarchicalPolicy p;
  auto j = parse_model(doc, "hierarchical", p.schema, p.objective);
  try {
    const auto& params = j.at("params");
    p.params.cluster_depth = params.at("cluster_depth").get<int>();
    p.params.pe_depth = params.at("pe_depth").get<int>();
    p.params.min_leaf = params.at("min_leaf").get<int>();
    p.params.allow_starving = params.at("allow_starving").get<bool>();
    p.cluster_tree = tree_from_json(j.at("cluster_tree"));
    check_tree(p.cluster_tree, p.schema);
    const auto& pe = j.at("pe_policies");
    if (pe.size() != p.schema.cluster_names.size()) throw SchemaMismatch("model has the wrong number of PE policies");
    for (std::size_t c = 0; c < pe.size(); ++c) {
      if (pe[c].at("cluster").get<std::string>() != p.schema.cluster_names[c]) throw SchemaMismatch("PE policy order differs from the schema");
      if (pe[c].contains("tree")) {
        p.pe_trees.emplace_back(tree_from_json(pe[c].at("tree")));
        check_tree(*p.pe_trees.back(), p.schema);
        p.constant_pe.push_back(0);
      } else {
        p.pe_trees.emplace_back(std::nullopt);
        p.constant_pe.push_back(pe[c].at("constant").get<int>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  }
  return p;
}

FlatPolicy load_flat_policy(std::string_view doc) {
  FlatPolicy p;
  auto j = parse_model(doc, "flat", p.schema, p.objective);
  try {
    p.tree = tree_from_json(j.at("tree"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  }
  check_tree(p.tree, p.schema);
  return p;
}

std::string model_kind(std::string_view doc) {
  try {
    return nlohmann::json::parse(doc).at("kind").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  }
}

void require_same_schema(const FeatureSchema& expected, const FeatureSchema& actual) {
  if (!(expected == actual)) {
    throw SchemaMismatch("expected schema [" + serialize_schema(expected) + "], got [" + serialize_schema(actual) + "]");
  }
}

AccuracyReport evaluate_accuracy(const HierarchicalPolicy& p, const Dataset& d, const std::vector<std::size_t>& rows) {
  const std::size_t nc = p.schema.cluster_names.size();
  AccuracyReport a;
  a.pe.assign(nc, 0.0);
  a.pe_rows.assign(nc, 0);
  std::size_t cluster_ok = 0;
  std::size_t both_ok = 0;
  std::vector<std::size_t> pe_ok(nc, 0);
  for (std::size_t i : rows) {
    const auto& r = d.rows[i];
    if (r.role != RowRole::both) continue;
    ++a.rows;
    const int c = p.predict_cluster(r.x);
    const auto tc = static_cast<std::size_t>(r.cluster);
    const bool pe_right = p.predict_pe_index(r.cluster, r.x) == r.pe_index;
    ++a.pe_rows[tc];
    if (pe_right) ++pe_ok[tc];
    if (c == r.cluster) {
      ++cluster_ok;
      if (pe_right) ++both_ok;
    }
  }
  if (a.rows == 0) return a;
  a.cluster = static_cast<double>(cluster_ok) / static_cast<double>(a.rows);
  a.composite = static_cast<double>(both_ok) / static_cast<double>(a.rows);
  for (std::size_t c = 0; c < nc; ++c) {
    a.pe[c] = a.pe_rows[c] ? static_cast<double>(pe_ok[c]) / static_cast<double>(a.pe_rows[c]) : 1.0;
  }
  return a;
}

double flat_accuracy(const FlatPolicy& p, const Dataset& d, const std::vector<std::size_t>& rows) {
  std::size_t n = 0;
  std::size_t ok = 0;
  for (std::size_t i : rows) {
    const auto& r = d.rows[i];
    if (r.role != RowRole::both) continue;
    ++n;
    if (p.tree.predict(r.x) == d.flat_label(r)) ++ok;
  }
  return n ? static_cast<double>(ok) / static_cast<double>(n) : 0.0;
}

}  // namespace ilsched
