#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ilsched/features.hpp"

namespace ilsched {

// Which trees a row trains: oracle rows feed both levels; aggregation may add
// rows meant for only one level.
enum class RowRole { both, cluster_only, pe_only };

std::string_view row_role_name(RowRole role);

struct DatasetRow {
  FeatureVector x;
  int cluster = 0;   // schema cluster index
  int pe_index = 0;  // position inside that cluster
  RowRole role = RowRole::both;
  AppId app_id = 0;
  std::string tag = "initial";  // provenance: "initial" or "dagger-<n>"

  bool operator==(const DatasetRow&) const = default;
};

struct Dataset {
  FeatureSchema schema;
  std::vector<DatasetRow> rows;

  // Global PE label: cluster offset plus pe_index, in schema order.
  int flat_label(const DatasetRow& row) const;
  int flat_classes() const;
  // Throws ValidationError when a row violates the schema or label ranges.
  void validate() const;
};

// CSV with a two-line comment header (format version, then schema) and one
// column per feature followed by cluster, pe_index, role, app_id, tag.
std::string dump_dataset(const Dataset& dataset);
Dataset load_dataset(std::string_view text);

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per flat label, a seeded shuffle sends floor(test_fraction * n) rows to test.
DataSplit stratified_split(const Dataset& dataset, double test_fraction, std::uint64_t seed);

}  // namespace ilsched
