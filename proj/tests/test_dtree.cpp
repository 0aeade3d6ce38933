#include <doctest.h>

#include "fixtures.hpp"
#include "ilsched/error.hpp"
#include "ilsched/textio.hpp"

using namespace ilsched;

namespace {

double accuracy(const DecisionTree& t, const TrainingSet& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) ok += t.predict(d.row(i)) == d.y[i];
  return static_cast<double>(ok) / static_cast<double>(d.rows());
}

// Two features on a small integer grid, label from a noisy quadrant rule.
TrainingSet synthetic(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> v(0, 9);
  std::uniform_int_distribution<int> noise(0, 9);
  TrainingSet d;
  d.cols = 2;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = v(rng);
    const double b = v(rng);
    int label = (a > 4) != (b > 6) ? 1 : 0;
    if (a < 2) label = 2;
    if (noise(rng) == 0) label = (label + 1) % 3;
    d.add(std::vector<double>{a, b}, label);
  }
  return d;
}

}  // namespace

TEST_CASE("single class gives a leaf") {
  TrainingSet d;
  d.cols = 3;
  for (int i = 0; i < 10; ++i) d.add(std::vector<double>{double(i), 1.0, -2.0}, 2);
  const auto t = train_tree(d, 4, {});
  CHECK(t.depth() == 0);
  CHECK(t.leaf_count() == 1);
  CHECK(accuracy(t, d) == 1.0);
  CHECK(t.predict(std::vector<double>{100, 0, 0}) == 2);
}

TEST_CASE("separable on feature 3 at 5") {
  TrainingSet d;
  d.cols = 5;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> junk(0.0, 1.0);
  for (int v : {1, 2, 3, 4, 6, 7, 8, 9}) {
    for (int r = 0; r < 3; ++r) d.add(std::vector<double>{junk(rng), junk(rng), junk(rng), double(v), junk(rng)}, v > 5 ? 1 : 0);
  }
  const auto t = train_tree(d, 2, {});
  CHECK(t.nodes[0].feature == 3);
  CHECK(t.nodes[0].threshold == doctest::Approx(5.0));
  CHECK(t.depth() == 1);
  CHECK(accuracy(t, d) == 1.0);
}

TEST_CASE("XOR needs a zero-gain first split") {
  TrainingSet d;
  d.cols = 2;
  for (int r = 0; r < 5; ++r) {
    d.add(std::vector<double>{0, 0}, 0);
    d.add(std::vector<double>{0, 1}, 1);
    d.add(std::vector<double>{1, 0}, 1);
    d.add(std::vector<double>{1, 1}, 0);
  }
  const auto t = train_tree(d, 2, {.max_depth = 2, .min_leaf = 1});
  CHECK(accuracy(t, d) == 1.0);
  CHECK(t.depth() == 2);
}

TEST_CASE("training accuracy is at least the best depth-2 tree on 200 rows") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto d = synthetic(seed, 200);
    std::vector<std::vector<double>> x;
    for (std::size_t i = 0; i < d.rows(); ++i) x.emplace_back(d.row(i).begin(), d.row(i).end());
    const int best2 = fx::best_depth2_correct(x, d.y, 3);
    const auto t = train_tree(d, 3, {});
    CHECK(accuracy(t, d) * 200.0 >= best2 - 1e-9);
  }
}

TEST_CASE("depth and leaf size limits hold") {
  const auto d = synthetic(9, 400);
  const auto t = train_tree(d, 3, {.max_depth = 3, .min_leaf = 10});
  CHECK(t.depth() <= 3);
  for (const auto& n : t.nodes) {
    int total = 0;
    for (int c : n.counts) total += c;
    CHECK(total >= 10);
  }
}

TEST_CASE("serial and parallel induction agree") {
  for (std::uint64_t seed : {4u, 5u}) {
    const auto d = synthetic(seed, 500);
    CHECK(train_tree(d, 3, {}, ExecMode::serial) == train_tree(d, 3, {}, ExecMode::parallel));
  }
  const auto p = make_pipeline({.rate_fractions = {0.3}});
  const auto run = oracle_dataset(p.arch, p.apps, p.traces, Objective::performance, p.schema, {}, ExecMode::serial);
  TrainingSet ts;
  ts.cols = p.schema.size();
  for (const auto& r : run.dataset.rows) ts.add(r.x, run.dataset.flat_label(r));
  CHECK(train_tree(ts, run.dataset.flat_classes(), {}, ExecMode::serial) ==
        train_tree(ts, run.dataset.flat_classes(), {}, ExecMode::parallel));
}

TEST_CASE("JSON round-trip") {
  const auto t = train_tree(synthetic(6, 300), 3, {});
  const auto j = tree_to_json(t);
  CHECK(tree_from_json(nlohmann::json::parse(j.dump())) == t);
  CHECK_THROWS_AS(tree_from_json(nlohmann::json::parse(R"({"nodes":3})")), ParseError);
}

TEST_CASE("errors") {
  TrainingSet empty;
  empty.cols = 2;
  CHECK_THROWS_AS(train_tree(empty, 2, {}), EmptyDataset);
  const auto t = train_tree(synthetic(1, 50), 3, {});
  CHECK_THROWS_AS(t.predict(std::vector<double>{1.0}), SchemaMismatch);
  const auto c = constant_tree(4, 3, 2);
  CHECK(c.predict(std::vector<double>{0, 0, 0, 0}) == 2);
}

TEST_CASE("frozen tree on a fixed synthetic set") {
  const auto t = train_tree(synthetic(42, 200), 3, {.max_depth = 4, .min_leaf = 4});
  CHECK(t.nodes.size() == 21);
  CHECK(textio::hex64(textio::fnv1a(tree_to_json(t).dump())) == "83f24c099f17d966");
  CHECK(t.predict(std::vector<double>{1, 8}) == 2);
  CHECK(t.predict(std::vector<double>{7, 2}) == 1);
  CHECK(t.predict(std::vector<double>{7, 8}) == 0);
}
