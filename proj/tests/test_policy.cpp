#include <doctest.h>

#include "fixtures.hpp"
#include "ilsched/error.hpp"

using namespace ilsched;

namespace {

Dataset constant_dataset(const ArchitectureGraph& arch, int cluster, int pe_index, std::size_t n) {
  Dataset d;
  d.schema = feature_schema(arch, 2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (std::size_t i = 0; i < n; ++i) {
    DatasetRow r;
    r.x.resize(d.schema.size());
    for (auto& v : r.x) v = u(rng);
    r.cluster = cluster;
    r.pe_index = pe_index;
    d.rows.push_back(r);
  }
  return d;
}

// Cluster "a" has three PEs, "b" one; x[0] picks the cluster, x[1] the PE.
Dataset toy_dataset(const ArchitectureGraph& arch) {
  Dataset d;
  d.schema = feature_schema(arch, 1);
  for (int rep = 0; rep < 10; ++rep) {
    for (int k = 0; k < 4; ++k) {
      DatasetRow r;
      r.x.assign(d.schema.size(), 0.0);
      r.x[0] = k == 3 ? 10.0 : 1.0;
      r.x[1] = k;
      r.cluster = k == 3 ? 1 : 0;
      r.pe_index = k == 3 ? 0 : k;
      d.rows.push_back(r);
    }
  }
  return d;
}

const ArchitectureGraph& toy_arch() {
  static const auto a = fx::platform({"t", "u"}, {{"a", 3, {{"t", {10.0, 100.0}}}}, {"b", 1, {{"t", {12.0, 80.0}}, {"u", {4.0, 50.0}}}}});
  return a;
}

}  // namespace

TEST_CASE("default hyperparameters") {
  CHECK(default_params(Objective::performance).cluster_depth == 12);
  CHECK(default_params(Objective::energy).cluster_depth == 16);
  CHECK(default_params(Objective::ed2p).pe_depth == 16);
}

TEST_CASE("constant labels give a constant policy") {
  const auto g1 = builtin_platform("G1");
  const auto d = constant_dataset(g1, 0, 1, 40);
  CHECK_THROWS_AS(train_hierarchical(d, Objective::performance, {}), InsufficientData);
  PolicyParams p;
  p.allow_starving = true;
  const auto pol = train_hierarchical(d, Objective::performance, p);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50.0, 500.0);
  for (int i = 0; i < 50; ++i) {
    FeatureVector x(d.schema.size());
    for (auto& v : x) v = u(rng);
    CHECK(pol.predict_cluster(x) == 0);
    CHECK(pol.predict_pe_index(0, x) == 1);
  }
}

TEST_CASE("a one-PE platform needs no PE tree") {
  const auto one = fx::platform({"t"}, {{"p", 1, {{"t", {10.0, 100.0}}}}});
  const auto d = constant_dataset(one, 0, 0, 10);
  const auto pol = train_hierarchical(d, Objective::performance, {});
  CHECK(!pol.pe_trees[0].has_value());
  CHECK(pol.predict_pe_index(0, d.rows[0].x) == 0);
  const auto flat = train_flat(d, Objective::performance, 12);
  CHECK(flat_accuracy(flat, d, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}) == 1.0);
}

TEST_CASE("toy dataset is learned exactly, hierarchical and flat") {
  const auto d = toy_dataset(toy_arch());
  PolicyParams p;
  p.min_leaf = 1;
  const auto pol = train_hierarchical(d, Objective::performance, p);
  std::vector<std::size_t> all(d.rows.size());
  std::iota(all.begin(), all.end(), 0);
  const auto acc = evaluate_accuracy(pol, d, all);
  CHECK(acc.rows == 40);
  CHECK(acc.cluster == 1.0);
  CHECK(acc.composite == 1.0);
  CHECK(acc.pe_rows[0] == 30);
  CHECK(acc.pe[0] == 1.0);
  const auto flat = train_flat(d, Objective::performance, 12, 1);
  CHECK(flat_accuracy(flat, d, all) == 1.0);
  CHECK(flat.predict(d.rows[3].x) == std::pair<int, int>{1, 0});
  CHECK(flat.predict(d.rows[2].x) == std::pair<int, int>{0, 2});
  CHECK(d.flat_classes() == 4);
  CHECK(d.flat_label(d.rows[3]) == 3);
}

TEST_CASE("role-restricted rows train one level only") {
  auto d = toy_dataset(toy_arch());
  for (auto& r : d.rows) {
    if (r.cluster == 1) r.role = RowRole::pe_only;  // cluster tree never sees cluster b
  }
  PolicyParams p;
  p.min_leaf = 1;
  const auto pol = train_hierarchical(d, Objective::performance, p);
  CHECK(pol.predict_cluster(d.rows[3].x) == 0);
}

TEST_CASE("fallbacks") {
  const auto& big = toy_arch();
  const auto small = fx::platform({"t", "u"}, {{"a", 2, {{"t", {10.0, 100.0}}}}, {"b", 1, {{"t", {12.0, 80.0}}, {"u", {4.0, 50.0}}}}});
  const FeatureExtractor ex(feature_schema(big, 1), small);
  const std::vector<ApplicationGraph> apps{fx::app("tu", 0, {"t", "u"}, {})};
  SimState s(small, apps);
  s.add_arrival(0, "tu", 0.0);
  REQUIRE(s.advance());
  s.set_pe_ready_time(0, 30.0);

  const auto direct = resolve_prediction(ex, s, 0, 0, 1);
  CHECK(direct.pe == 1);
  CHECK(!direct.fallback);
  // Third PE of "a" does not exist here: earliest-ready capable PE of "a".
  const auto missing = resolve_prediction(ex, s, 0, 0, 2);
  CHECK(missing.fallback);
  CHECK(missing.pe == 1);
  // "a" cannot run type u: ETF picks for the task.
  const auto incapable = resolve_prediction(ex, s, 1, 0, 0);
  CHECK(incapable.fallback);
  CHECK(incapable.pe == etf_best_for_task(s, 1, Objective::performance).pe);
  CHECK(incapable.pe == 2);
}

TEST_CASE("a G5 policy places work only on LITTLE and big") {
  const auto p = make_pipeline({.platform = "G5", .rate_fractions = {0.3}});
  const auto run = oracle_dataset(p.arch, p.apps, p.traces, Objective::performance, p.schema);
  const auto pol = train_hierarchical(run.dataset, Objective::performance, {});
  CHECK(pol.schema.cluster_names == std::vector<std::string>{"LITTLE", "big"});
  IlScheduler il(pol, p.arch);
  const auto r = run_simulation(p.arch, p.apps, p.traces[0], il);
  CHECK(r.frames.size() == p.traces[0].arrivals.size());
  for (const auto& t : r.tasks) CHECK(t.pe < 8);
}

TEST_CASE("model files") {
  const auto d = toy_dataset(toy_arch());
  PolicyParams p;
  p.min_leaf = 1;
  const auto pol = train_hierarchical(d, Objective::edp, p);
  const auto text = dump_policy(pol);
  CHECK(model_kind(text) == "hierarchical");
  const auto back = load_policy(text);
  CHECK(back.schema == pol.schema);
  CHECK(back.objective == Objective::edp);
  CHECK(back.cluster_tree == pol.cluster_tree);
  CHECK(back.pe_trees == pol.pe_trees);
  CHECK(dump_policy(back) == text);

  auto j = nlohmann::json::parse(text);
  j["schema_hash"] = "0000000000000000";
  CHECK_THROWS_AS(load_policy(j.dump()), SchemaMismatch);
  j = nlohmann::json::parse(text);
  j["format_version"] = 9;
  CHECK_THROWS_AS(load_policy(j.dump()), ParseError);
  CHECK_THROWS_AS(load_policy("not json"), ParseError);

  const auto flat = train_flat(d, Objective::performance, 12, 1);
  const auto ftext = dump_flat_policy(flat);
  CHECK(model_kind(ftext) == "flat");
  CHECK(load_flat_policy(ftext).tree == flat.tree);
  CHECK_THROWS_AS(require_same_schema(pol.schema, feature_schema(builtin_platform("G1"), 4)), SchemaMismatch);
}

TEST_CASE("dataset file round-trip and stratified split") {
  const auto p = make_pipeline({.rate_fractions = {0.2}});
  const auto run = oracle_dataset(p.arch, p.apps, p.traces, Objective::performance, p.schema);
  const auto& d = run.dataset;
  CHECK(d.rows.size() == 8335);
  CHECK_NOTHROW(d.validate());
  const auto text = dump_dataset(d);
  const auto back = load_dataset(text);
  CHECK(back.schema == d.schema);
  CHECK(back.rows == d.rows);
  CHECK(dump_dataset(back) == text);

  const auto split = stratified_split(d, 0.2, 7);
  CHECK(split.train.size() + split.test.size() == d.rows.size());
  std::vector<std::size_t> seen(split.train);
  seen.insert(seen.end(), split.test.begin(), split.test.end());
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
  std::map<int, std::size_t> total;
  std::map<int, std::size_t> test;
  for (const auto& r : d.rows) ++total[d.flat_label(r)];
  for (auto i : split.test) ++test[d.flat_label(d.rows[i])];
  for (const auto& [label, n] : total) CHECK(test[label] == n / 5);
  const auto again = stratified_split(d, 0.2, 7);
  CHECK(again.test == split.test);
  CHECK_THROWS_AS(load_dataset("# nothing"), ParseError);
}
