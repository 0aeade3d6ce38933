#include "ilsched/platform.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>

#include "ilsched/error.hpp"
#include "ilsched/rng.hpp"

namespace ilsched {

using nlohmann::json;

TypeId ArchitectureGraph::find_type(std::string_view type_name) const {
  for (std::size_t i = 0; i < task_types.size(); ++i) {
    if (task_types[i] == type_name) return static_cast<TypeId>(i);
  }
  return -1;
}

ClusterId ArchitectureGraph::find_cluster(std::string_view cluster_name) const {
  for (const auto& c : clusters) {
    if (c.name == cluster_name) return c.id;
  }
  return -1;
}

const ProcessingElement& ArchitectureGraph::pe(PeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= pes.size()) {
    throw UnknownPe("PE " + std::to_string(id) + " not in platform " + name);
  }
  return pes[static_cast<std::size_t>(id)];
}

int ArchitectureGraph::index_in_cluster(PeId id) const {
  const auto& ids = cluster_of(id).pe_ids;
  auto it = std::find(ids.begin(), ids.end(), id);
  return static_cast<int>(it - ids.begin());
}

double comm_latency(const ArchitectureGraph& arch, PeId src, PeId dst, double volume) {
  arch.pe(src);
  arch.pe(dst);
  if (src == dst) return 0.0;
  return arch.link_rate(src, dst) * volume;
}

void validate_platform(const ArchitectureGraph& arch) {
  auto fail = [&](const std::string& msg) { throw ValidationError(arch.name + ": " + msg); };
  if (arch.pes.empty()) fail("platform has no PEs");
  if (arch.clusters.empty()) fail("platform has no clusters");
  {
    std::set<std::string> names(arch.task_types.begin(), arch.task_types.end());
    if (names.size() != arch.task_types.size()) fail("duplicate task type name");
  }
  const std::size_t n = arch.pes.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (arch.pes[i].id != static_cast<PeId>(i)) fail("PE ids are not dense");
  }
  std::vector<int> owner(n, -1);
  std::set<std::string> cluster_names;
  for (std::size_t c = 0; c < arch.clusters.size(); ++c) {
    const auto& cl = arch.clusters[c];
    if (cl.id != static_cast<ClusterId>(c)) fail("cluster ids are not dense");
    if (!cluster_names.insert(cl.name).second) fail("duplicate cluster name " + cl.name);
    if (cl.pe_ids.empty()) fail("cluster " + cl.name + " has no PEs");
    for (PeId p : cl.pe_ids) {
      if (p < 0 || static_cast<std::size_t>(p) >= n) fail("cluster " + cl.name + " references unknown PE " + std::to_string(p));
      auto& o = owner[static_cast<std::size_t>(p)];
      if (o != -1) fail("PE " + std::to_string(p) + " listed in two clusters");
      o = static_cast<int>(c);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (owner[i] == -1) fail("PE " + std::to_string(i) + " belongs to no cluster");
    if (arch.pes[i].cluster_id != owner[i]) fail("PE " + std::to_string(i) + " has inconsistent cluster id");
    const auto& prof = arch.pes[i].profile;
    if (prof.size() != arch.task_types.size()) fail("PE " + std::to_string(i) + " profile size mismatch");
    for (const auto& cost : prof) {
      if (!cost) continue;
      if (!(cost->exec_us > 0.0) || !std::isfinite(cost->exec_us)) fail("PE " + std::to_string(i) + " has non-positive execution time");
      if (!(cost->power_mw > 0.0) || !std::isfinite(cost->power_mw)) fail("PE " + std::to_string(i) + " has non-positive power");
    }
  }
  for (const auto& cl : arch.clusters) {
    const auto& ref = arch.pes[static_cast<std::size_t>(cl.pe_ids.front())].profile;
    for (PeId p : cl.pe_ids) {
      if (arch.pes[static_cast<std::size_t>(p)].profile != ref) fail("cluster " + cl.name + " is not homogeneous");
    }
  }
  if (arch.link_rates.size() != n * n) fail("link table is not total over PE pairs");
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t d = 0; d < n; ++d) {
      double r = arch.link_rates[s * n + d];
      if (!(r >= 0.0) || !std::isfinite(r)) fail("negative link rate");
      if (s == d && r != 0.0) fail("self link must have zero latency");
    }
  }
}

namespace {

double number_at(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ParseError(where + ": missing number '" + key + "'");
  return j.at(key).get<double>();
}

}  // namespace

ArchitectureGraph load_platform(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("platform document: ") + e.what());
  }
  ArchitectureGraph arch;
  try {
    if (!doc.is_object()) throw ParseError("platform document must be an object");
    arch.name = doc.value("name", std::string("custom"));
    if (!doc.contains("task_types") || !doc.at("task_types").is_array()) throw ParseError("missing task_types");
    for (const auto& t : doc.at("task_types")) arch.task_types.push_back(t.get<std::string>());
    if (!doc.contains("clusters") || !doc.at("clusters").is_array()) throw ParseError("missing clusters");

    // First pass: PE ids. Explicit pe_ids win; otherwise ids are allocated
    // sequentially in cluster order.
    PeId next_id = 0;
    std::vector<std::vector<PeId>> members;
    for (const auto& c : doc.at("clusters")) {
      std::vector<PeId> ids;
      if (c.contains("pe_ids")) {
        for (const auto& p : c.at("pe_ids")) ids.push_back(p.get<int>());
      } else {
        int count = c.at("pe_count").get<int>();
        if (count < 0) throw ParseError("negative pe_count");
        for (int k = 0; k < count; ++k) ids.push_back(next_id++);
      }
      for (PeId p : ids) next_id = std::max(next_id, p + 1);
      members.push_back(std::move(ids));
    }
    arch.pes.resize(static_cast<std::size_t>(next_id));
    for (std::size_t i = 0; i < arch.pes.size(); ++i) {
      arch.pes[i].id = static_cast<PeId>(i);
      arch.pes[i].cluster_id = -1;
      arch.pes[i].profile.assign(arch.task_types.size(), std::nullopt);
    }

    ClusterId cid = 0;
    for (const auto& c : doc.at("clusters")) {
      Cluster cl;
      cl.id = cid;
      cl.name = c.at("name").get<std::string>();
      cl.pe_ids = members[static_cast<std::size_t>(cid)];
      std::vector<std::optional<TaskCost>> profile(arch.task_types.size());
      if (c.contains("profile")) {
        for (const auto& [type_name, entry] : c.at("profile").items()) {
          TypeId t = arch.find_type(type_name);
          if (t < 0) throw ParseError("cluster " + cl.name + " profiles undeclared task type '" + type_name + "'");
          profile[static_cast<std::size_t>(t)] =
              TaskCost{number_at(entry, "exec_us", cl.name), number_at(entry, "power_mw", cl.name)};
        }
      }
      for (PeId p : cl.pe_ids) {
        if (p < 0) throw ParseError("negative PE id");
        auto& pe = arch.pes[static_cast<std::size_t>(p)];
        // A PE claimed twice keeps its first cluster; validation reports it.
        if (pe.cluster_id == -1) {
          pe.cluster_id = cid;
          pe.profile = profile;
        }
      }
      arch.clusters.push_back(std::move(cl));
      ++cid;
    }

    const std::size_t n = arch.pes.size();
    double intra = 0.0;
    double inter = 0.0;
    json overrides = json::array();
    if (doc.contains("links")) {
      const auto& l = doc.at("links");
      intra = l.value("intra_cluster", 0.0);
      inter = l.value("inter_cluster", 0.0);
      if (l.contains("overrides")) overrides = l.at("overrides");
    }
    arch.link_rates.assign(n * n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t d = 0; d < n; ++d) {
        if (s == d) continue;
        arch.link_rates[s * n + d] = arch.pes[s].cluster_id == arch.pes[d].cluster_id ? intra : inter;
      }
    }
    for (const auto& o : overrides) {
      int s = o.at("src").get<int>();
      int d = o.at("dst").get<int>();
      if (s < 0 || d < 0 || static_cast<std::size_t>(s) >= n || static_cast<std::size_t>(d) >= n) {
        throw ParseError("link override references unknown PE");
      }
      arch.link_rates[static_cast<std::size_t>(s) * n + static_cast<std::size_t>(d)] = o.at("rate").get<double>();
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("platform document: ") + e.what());
  }
  validate_platform(arch);
  return arch;
}

std::string dump_platform(const ArchitectureGraph& arch) {
  json doc;
  doc["format_version"] = 1;
  doc["name"] = arch.name;
  doc["task_types"] = arch.task_types;
  json clusters = json::array();
  for (const auto& cl : arch.clusters) {
    json c;
    c["name"] = cl.name;
    c["pe_ids"] = cl.pe_ids;
    json profile = json::object();
    const auto& pe = arch.pes[static_cast<std::size_t>(cl.pe_ids.front())];
    for (std::size_t t = 0; t < arch.task_types.size(); ++t) {
      if (!pe.profile[t]) continue;
      profile[arch.task_types[t]] = {{"exec_us", pe.profile[t]->exec_us}, {"power_mw", pe.profile[t]->power_mw}};
    }
    c["profile"] = profile;
    clusters.push_back(c);
  }
  doc["clusters"] = clusters;

  // Recover the two uniform rates and list anything else as overrides.
  const std::size_t n = arch.pes.size();
  std::optional<double> intra;
  std::optional<double> inter;
  for (std::size_t s = 0; s < n && !(intra && inter); ++s) {
    for (std::size_t d = 0; d < n; ++d) {
      if (s == d) continue;
      bool same = arch.pes[s].cluster_id == arch.pes[d].cluster_id;
      auto& slot = same ? intra : inter;
      if (!slot) slot = arch.link_rates[s * n + d];
    }
  }
  json overrides = json::array();
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t d = 0; d < n; ++d) {
      if (s == d) continue;
      bool same = arch.pes[s].cluster_id == arch.pes[d].cluster_id;
      double expected = same ? intra.value_or(0.0) : inter.value_or(0.0);
      double actual = arch.link_rates[s * n + d];
      if (actual != expected) overrides.push_back({{"src", s}, {"dst", d}, {"rate", actual}});
    }
  }
  doc["links"] = {{"intra_cluster", intra.value_or(0.0)}, {"inter_cluster", inter.value_or(0.0)}};
  if (!overrides.empty()) doc["links"]["overrides"] = overrides;
  return doc.dump(2) + "\n";
}

// ---- generator ---------------------------------------------------------------

const std::vector<TaskTypeInfo>& builtin_task_types() {
  static const std::vector<TaskTypeInfo> types = {
      {"scrambler", TaskKind::general},     {"encoder", TaskKind::general},
      {"interleaver", TaskKind::general},   {"qpsk_mod", TaskKind::general},
      {"pilot_insert", TaskKind::general},  {"crc", TaskKind::general},
      {"demod", TaskKind::general},         {"deinterleaver", TaskKind::general},
      {"descrambler", TaskKind::general},   {"lfm_gen", TaskKind::general},
      {"vector_mul", TaskKind::general},    {"peak_detect", TaskKind::general},
      {"bpsk_mod", TaskKind::general},      {"match_filter", TaskKind::general},
      {"payload_extract", TaskKind::general}, {"mat_inverse", TaskKind::general},
      {"cov_est", TaskKind::general},       {"doppler_shift", TaskKind::general},
      {"fft", TaskKind::fft},               {"ifft", TaskKind::fft},
      {"viterbi", TaskKind::viterbi},       {"matmul", TaskKind::matmul},
  };
  return types;
}

namespace {

double round_to(double value, double step) { return std::round(value / step) * step; }

struct TypeDraw {
  TaskCost little;
  TaskCost big;
  std::optional<TaskCost> accel;
};

std::vector<TypeDraw> draw_profiles(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TypeDraw> out;
  for (const auto& info : builtin_task_types()) {
    double lo = 15.0, hi = 60.0;
    switch (info.kind) {
      case TaskKind::general: break;
      case TaskKind::fft: lo = 50.0; hi = 100.0; break;
      case TaskKind::viterbi: lo = 150.0; hi = 300.0; break;
      case TaskKind::matmul: lo = 80.0; hi = 160.0; break;
    }
    // Fixed draw order per type, independent of cluster counts, so G1..G5
    // share one profile.
    double little_exec = rng.uniform(lo, hi);
    double big_speedup = rng.uniform(1.5, 3.0);
    double acc_speedup = rng.uniform(5.0, 20.0);
    double little_power = rng.uniform(150.0, 300.0);
    double acc_power = rng.uniform(400.0, 800.0);
    double big_power = rng.uniform(1200.0, 2400.0);
    TypeDraw d;
    d.little = {round_to(little_exec, 0.1), round_to(little_power, 1.0)};
    d.big = {round_to(little_exec / big_speedup, 0.1), round_to(big_power, 1.0)};
    if (info.kind != TaskKind::general) d.accel = TaskCost{round_to(little_exec / acc_speedup, 0.1), round_to(acc_power, 1.0)};
    out.push_back(d);
  }
  return out;
}

}  // namespace

ArchitectureGraph generate_platform(std::string name, const ClusterCounts& counts, const ProfileOptions& options) {
  const auto& catalog = builtin_task_types();
  const auto draws = draw_profiles(options.seed);
  ArchitectureGraph arch;
  arch.name = std::move(name);
  for (const auto& info : catalog) arch.task_types.push_back(info.name);
  const std::size_t ntypes = catalog.size();

  struct Spec {
    const char* name;
    int count;
    std::optional<TaskKind> accel_kind;  // empty = general-purpose core
    bool big;
  };
  const Spec specs[] = {
      {"LITTLE", counts.little, std::nullopt, false}, {"big", counts.big, std::nullopt, true},
      {"MatMul", counts.matmul, TaskKind::matmul, false}, {"FFT", counts.fft, TaskKind::fft, false},
      {"Decoder", counts.decoder, TaskKind::viterbi, false},
  };
  for (const auto& s : specs) {
    if (s.count <= 0) continue;
    std::vector<std::optional<TaskCost>> profile(ntypes);
    for (std::size_t t = 0; t < ntypes; ++t) {
      if (!s.accel_kind) {
        profile[t] = s.big ? draws[t].big : draws[t].little;
      } else if (catalog[t].kind == *s.accel_kind) {
        profile[t] = draws[t].accel;
      }
    }
    Cluster cl;
    cl.id = static_cast<ClusterId>(arch.clusters.size());
    cl.name = s.name;
    for (int k = 0; k < s.count; ++k) {
      ProcessingElement pe;
      pe.id = static_cast<PeId>(arch.pes.size());
      pe.cluster_id = cl.id;
      pe.profile = profile;
      cl.pe_ids.push_back(pe.id);
      arch.pes.push_back(std::move(pe));
    }
    arch.clusters.push_back(std::move(cl));
  }
  const std::size_t n = arch.pes.size();
  arch.link_rates.assign(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      arch.link_rates[a * n + b] =
          arch.pes[a].cluster_id == arch.pes[b].cluster_id ? options.intra_cluster_rate : options.inter_cluster_rate;
    }
  }
  validate_platform(arch);
  return arch;
}

ClusterCounts builtin_cluster_counts(std::string_view name) {
  if (name == "G1") return {4, 4, 2, 4, 2};
  if (name == "G2") return {2, 2, 2, 2, 2};
  if (name == "G3") return {1, 1, 1, 1, 1};
  if (name == "G4") return {4, 4, 1, 1, 1};
  if (name == "G5") return {4, 4, 0, 0, 0};
  throw UnknownConfig("no built-in platform named '" + std::string(name) + "'");
}

ArchitectureGraph builtin_platform(std::string_view name) {
  return generate_platform(std::string(name), builtin_cluster_counts(name));
}

std::vector<std::string> builtin_platform_names() { return {"G1", "G2", "G3", "G4", "G5"}; }

}  // namespace ilsched
