#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ilsched {

using PeId = int;
using ClusterId = int;
using TypeId = int;

struct TaskCost {
  double exec_us = 0.0;
  double power_mw = 0.0;

  bool operator==(const TaskCost&) const = default;
};

struct Cluster {
  ClusterId id = 0;
  std::string name;
  std::vector<PeId> pe_ids;

  bool operator==(const Cluster&) const = default;
};

// A core or accelerator. profile[t] is empty when the PE cannot run type t.
struct ProcessingElement {
  PeId id = 0;
  ClusterId cluster_id = 0;
  std::vector<std::optional<TaskCost>> profile;

  bool supports(TypeId t) const {
    return t >= 0 && static_cast<std::size_t>(t) < profile.size() && profile[static_cast<std::size_t>(t)].has_value();
  }
  const TaskCost& cost(TypeId t) const { return *profile[static_cast<std::size_t>(t)]; }

  bool operator==(const ProcessingElement&) const = default;
};

// Heterogeneous platform: clusters of identical PEs plus a total table of
// per-volume link rates (µs per volume unit) over ordered PE pairs.
// Immutable once built; share it freely across threads.
class ArchitectureGraph {
 public:
  std::string name;
  std::vector<std::string> task_types;
  std::vector<Cluster> clusters;
  std::vector<ProcessingElement> pes;
  std::vector<double> link_rates;  // row-major, pes.size() squared

  std::size_t pe_count() const { return pes.size(); }
  std::size_t cluster_count() const { return clusters.size(); }

  // -1 when the type is not declared.
  TypeId find_type(std::string_view type_name) const;
  // -1 when no cluster has this name.
  ClusterId find_cluster(std::string_view cluster_name) const;

  const ProcessingElement& pe(PeId id) const;
  const Cluster& cluster_of(PeId id) const { return clusters[static_cast<std::size_t>(pe(id).cluster_id)]; }
  // Position of the PE inside its cluster's ordered pe_ids.
  int index_in_cluster(PeId id) const;

  double link_rate(PeId src, PeId dst) const {
    return link_rates[static_cast<std::size_t>(src) * pes.size() + static_cast<std::size_t>(dst)];
  }

  bool operator==(const ArchitectureGraph&) const = default;
};

// Throws ValidationError naming the first violated invariant.
void validate_platform(const ArchitectureGraph& arch);

// Platform description: a JSON document with task_types, clusters (each with
// pe_count or explicit pe_ids, and a per-type exec/power profile) and link
// rates (intra_cluster, inter_cluster, optional per-pair overrides).
ArchitectureGraph load_platform(std::string_view document);
std::string dump_platform(const ArchitectureGraph& arch);

// One of "G1".."G5".
ArchitectureGraph builtin_platform(std::string_view name);
std::vector<std::string> builtin_platform_names();

// latency_per_unit(src, dst) * volume; zero on the same PE.
double comm_latency(const ArchitectureGraph& arch, PeId src, PeId dst, double volume);

// ---- synthetic profile generator -------------------------------------------

enum class TaskKind { general, fft, viterbi, matmul };

struct TaskTypeInfo {
  std::string name;
  TaskKind kind;
};

// Task-type catalog shared by the bundled application suite and platforms.
const std::vector<TaskTypeInfo>& builtin_task_types();

struct ClusterCounts {
  int little = 4;
  int big = 4;
  int matmul = 2;
  int fft = 4;
  int decoder = 2;
};

inline constexpr std::uint64_t kDefaultProfileSeed = 20210731;

struct ProfileOptions {
  std::uint64_t seed = kDefaultProfileSeed;
  double intra_cluster_rate = 0.05;  // µs per volume unit
  double inter_cluster_rate = 0.15;
};

// Accelerators run their types 5-20x faster than LITTLE, big runs 1.5-3x
// faster; per task, power is ordered LITTLE < accelerator < big. Clusters with
// zero PEs are omitted.
ArchitectureGraph generate_platform(std::string name, const ClusterCounts& counts,
                                    const ProfileOptions& options = {});

ClusterCounts builtin_cluster_counts(std::string_view name);

}  // namespace ilsched
