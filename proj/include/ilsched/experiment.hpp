#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ilsched/dagger.hpp"
#include "ilsched/dataset.hpp"
#include "ilsched/oracle.hpp"
#include "ilsched/policy.hpp"

namespace ilsched {

// Sustainable throughput of the mix under ETF: frames divided by the makespan
// when every frame of the workload arrives at t=0. Frames per ms.
double saturation_rate(const ArchitectureGraph& arch, std::span<const ApplicationGraph> apps, const WorkloadSpec& mix);

// One trace per rate; rate i uses seed base.seed + i. Workload entries must
// name one of `apps`.
std::vector<FrameArrivalTrace> make_traces(const WorkloadSpec& base, std::span<const ApplicationGraph> apps,
                                           std::span<const double> rates);

struct OracleRun {
  Dataset dataset;
  std::vector<SimReport> reports;  // one per trace
};

// Simulates each trace under the ETF oracle, recording one row per decision
// in trace order.
OracleRun oracle_dataset(const ArchitectureGraph& arch, std::span<const ApplicationGraph> apps,
                         std::span<const FrameArrivalTrace> traces, Objective objective, const FeatureSchema& schema,
                         const SimOptions& sim = {}, ExecMode mode = ExecMode::parallel);

using SchedulerFactory = std::function<std::unique_ptr<Scheduler>()>;

struct SimJob {
  const ArchitectureGraph* arch = nullptr;
  const FrameArrivalTrace* trace = nullptr;
  SchedulerFactory make_scheduler;
  SimOptions options;
  double injection_rate = 0.0;
};

// Independent simulations over shared immutable inputs. Results come back in
// job order; serial and parallel modes produce identical reports apart from
// wall-clock fields.
std::vector<SimReport> run_jobs(std::span<const ApplicationGraph> apps, const std::vector<SimJob>& jobs,
                                ExecMode mode = ExecMode::parallel);

// Mean over traces of slowdown(a[i], b[i]).
double mean_slowdown(const std::vector<SimReport>& a, const std::vector<SimReport>& b);
// Mean over traces of |metric(a)/metric(b) - 1|.
double mean_abs_gap(const std::vector<SimReport>& a, const std::vector<SimReport>& b, Objective objective);

// Everything needed to go from a platform and a workload to trained policies.
struct PipelineConfig {
  std::string platform = "G1";
  int pred_slots = 4;
  bool pe_local = true;
  std::vector<double> rate_fractions{0.1, 0.2, 0.3, 0.4, 0.5};  // of the saturation rate
  std::uint64_t seed = 1;
  Objective objective = Objective::performance;
  DaggerOptions dagger;
};

struct Pipeline {
  ArchitectureGraph arch;
  std::vector<ApplicationGraph> apps;
  WorkloadSpec mix;
  double saturation = 0.0;
  std::vector<double> rates;
  std::vector<FrameArrivalTrace> traces;
  FeatureSchema schema;
};

// Builds the platform, suite, traces and schema for a config.
Pipeline make_pipeline(const PipelineConfig& config);
// Same from explicit inputs. Non-empty absolute_rates (frames/ms) take
// precedence over rate_fractions.
Pipeline build_pipeline(ArchitectureGraph arch, std::vector<ApplicationGraph> apps, WorkloadSpec mix,
                        const std::vector<double>& rate_fractions, const std::vector<double>& absolute_rates,
                        int pred_slots, bool pe_local);

struct LooResult {
  std::string app;
  double before = 0.0;  // slowdown vs oracle, policy trained without the app
  double after = 0.0;   // slowdown after DAgger on the full mix
  int iterations = 0;
  bool reached = false;
};

// Trains on the mix without `app` (its frames are removed from the traces),
// then measures and DAgger-corrects on the full mix. Throws UnknownApp when
// `app` is not one of pipeline.apps.
LooResult leave_one_out(const std::string& app, const Pipeline& pipeline, const PipelineConfig& config);

// Copies of the live state taken during an ETF run of the trace, one for
// each requested ready-set size (the first time that size is seen). Sizes
// never reached are absent from the result.
std::vector<SimState> capture_states(const ArchitectureGraph& arch, std::span<const ApplicationGraph> apps,
                                     const FrameArrivalTrace& trace, std::span<const std::size_t> ready_sizes);
// Every frame of the workload arriving at t=0.
FrameArrivalTrace burst_trace(const WorkloadSpec& mix, std::span<const ApplicationGraph> apps);

struct DecisionLatency {
  std::size_t ready_size = 0;
  LatencyStats etf;     // full etf_decide pair scan
  LatencyStats policy;  // policy_decide for the head task, feature extraction included
};

// Wall-clock per decision on each captured state, `iterations` samples each.
std::vector<DecisionLatency> measure_decision_latency(const HierarchicalPolicy& policy, const ArchitectureGraph& arch,
                                                      const std::vector<SimState>& states, int iterations);

}  // namespace ilsched
