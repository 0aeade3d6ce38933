#include "ilsched/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ilsched/error.hpp"
#include "ilsched/rng.hpp"
#include "ilsched/textio.hpp"

namespace ilsched {

std::string_view row_role_name(RowRole role) {
  switch (role) {
    case RowRole::both:
      return "both";
    case RowRole::cluster_only:
      return "cluster";
    case RowRole::pe_only:
      return "pe";
  }
  return "both";
}

namespace {

RowRole parse_role(std::string_view s) {
  for (auto r : {RowRole::both, RowRole::cluster_only, RowRole::pe_only}) {
    if (row_role_name(r) == s) return r;
  }
  throw ParseError("unknown row role '" + std::string(s) + "'");
}

}  // namespace

int Dataset::flat_label(const DatasetRow& row) const {
  int offset = 0;
  for (int c = 0; c < row.cluster; ++c) offset += schema.cluster_sizes[static_cast<std::size_t>(c)];
  return offset + row.pe_index;
}

int Dataset::flat_classes() const {
  int total = 0;
  for (int s : schema.cluster_sizes) total += s;
  return total;
}

void Dataset::validate() const {
  const int nc = static_cast<int>(schema.cluster_names.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.x.size() != schema.size()) throw ValidationError("row " + std::to_string(i) + " does not match the schema length");
    if (r.cluster < 0 || r.cluster >= nc) throw ValidationError("row " + std::to_string(i) + " has an out-of-range cluster");
    if (r.pe_index < 0 || r.pe_index >= schema.cluster_sizes[static_cast<std::size_t>(r.cluster)]) {
      throw ValidationError("row " + std::to_string(i) + " has an out-of-range PE index");
    }
    for (double v : r.x) {
      if (std::isnan(v)) throw ValidationError("row " + std::to_string(i) + " contains NaN");
    }
  }
}

std::string dump_dataset(const Dataset& d) {
  std::string out = "# ilsched-dataset format_version=1 rows=" + std::to_string(d.rows.size()) + "\n";
  out += "# schema " + serialize_schema(d.schema) + "\n";
  for (const auto& f : d.schema.features) out += f.name + ',';
  out += "cluster,pe_index,role,app_id,tag\n";
  for (const auto& r : d.rows) {
    for (double v : r.x) {
      out += textio::format_double(v);
      out += ',';
    }
    out += std::to_string(r.cluster) + ',' + std::to_string(r.pe_index) + ',' + std::string(row_role_name(r.role)) + ',' +
           std::to_string(r.app_id) + ',' + r.tag + '\n';
  }
  return out;
}

Dataset load_dataset(std::string_view text) {
  Dataset d;
  bool have_version = false;
  bool have_schema = false;
  bool have_columns = false;
  for (auto raw : textio::split(text, '\n')) {
    auto line = textio::trim(raw);
    if (line.empty()) continue;
    if (line.starts_with("# ilsched-dataset")) {
      if (line.find("format_version=1") == std::string_view::npos) throw ParseError("unsupported dataset format version");
      have_version = true;
      continue;
    }
    if (line.starts_with("# schema ")) {
      d.schema = parse_schema(line.substr(9));
      have_schema = true;
      continue;
    }
    if (line.front() == '#') continue;
    if (!have_version || !have_schema) throw ParseError("dataset header is missing");
    auto cells = textio::split(line, ',');
    const std::size_t nf = d.schema.size();
    if (!have_columns) {
      if (cells.size() != nf + 5) throw SchemaMismatch("dataset column count does not match its schema");
      for (std::size_t i = 0; i < nf; ++i) {
        if (cells[i] != d.schema.features[i].name) throw SchemaMismatch("dataset column '" + std::string(cells[i]) + "' does not match the schema");
      }
      have_columns = true;
      continue;
    }
    if (cells.size() != nf + 5) throw ParseError("dataset row has " + std::to_string(cells.size()) + " cells");
    DatasetRow r;
    r.x.reserve(nf);
    for (std::size_t i = 0; i < nf; ++i) r.x.push_back(textio::parse_double(cells[i]));
    r.cluster = static_cast<int>(textio::parse_int(cells[nf]));
    r.pe_index = static_cast<int>(textio::parse_int(cells[nf + 1]));
    r.role = parse_role(cells[nf + 2]);
    r.app_id = static_cast<AppId>(textio::parse_int(cells[nf + 3]));
    r.tag = std::string(cells[nf + 4]);
    d.rows.push_back(std::move(r));
  }
  if (!have_schema) throw ParseError("dataset has no schema header");
  d.validate();
  return d;
}

DataSplit stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < d.rows.size(); ++i) by_label[d.flat_label(d.rows[i])].push_back(i);
  Rng rng(seed);
  DataSplit s;
  for (auto& [label, idx] : by_label) {
    rng.shuffle(idx);
    const auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(idx.size())));
    s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace ilsched
