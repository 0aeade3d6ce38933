// Serial reference vs OpenMP kernels: oracle dataset generation, tree
// induction, and the independent-simulation sweep. Every pair must produce
// identical results; the timings show what the parallel path buys.
#include <omp.h>

#include <chrono>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>

#include "ilsched/experiment.hpp"

using namespace ilsched;

namespace {

double time_ms(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

bool same_frames(const std::vector<SimReport>& a, const std::vector<SimReport>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].frames.size() != b[i].frames.size()) return false;
    for (std::size_t k = 0; k < a[i].frames.size(); ++k) {
      const auto& x = a[i].frames[k];
      const auto& y = b[i].frames[k];
      if (x.completion_us != y.completion_us || x.energy_uj != y.energy_uj) return false;
    }
  }
  return true;
}

struct Row {
  std::string kernel;
  double serial_ms;
  double parallel_ms;
  bool identical;
};

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  PipelineConfig cfg;
  if (quick) cfg.rate_fractions = {0.2, 0.4};
  const Pipeline p = make_pipeline(cfg);
  std::vector<Row> rows;

  OracleRun serial_run;
  OracleRun parallel_run;
  const double ds_s = time_ms([&] {
    serial_run = oracle_dataset(p.arch, p.apps, p.traces, Objective::performance, p.schema, {}, ExecMode::serial);
  });
  const double ds_p = time_ms([&] {
    parallel_run = oracle_dataset(p.arch, p.apps, p.traces, Objective::performance, p.schema, {}, ExecMode::parallel);
  });
  rows.push_back({"oracle_dataset", ds_s, ds_p, serial_run.dataset.rows == parallel_run.dataset.rows});

  TrainingSet ts;
  ts.cols = p.schema.size();
  for (const auto& r : serial_run.dataset.rows) ts.add(r.x, serial_run.dataset.flat_label(r));
  const int classes = serial_run.dataset.flat_classes();
  TreeParams tp;
  tp.max_depth = quick ? 8 : 16;
  DecisionTree ts_serial;
  DecisionTree ts_parallel;
  const double tr_s = time_ms([&] { ts_serial = train_tree(ts, classes, tp, ExecMode::serial); });
  const double tr_p = time_ms([&] { ts_parallel = train_tree(ts, classes, tp, ExecMode::parallel); });
  rows.push_back({"train_tree", tr_s, tr_p, ts_serial == ts_parallel});

  std::vector<SimJob> jobs;
  const std::vector<double> noise = quick ? std::vector<double>{0.0, 0.05} : std::vector<double>{0.0, 0.05, 0.1, 0.15};
  for (std::size_t i = 0; i < p.traces.size(); ++i) {
    for (double n : noise) {
      SimOptions o;
      o.noise_pct = n;
      o.record_tasks = false;
      o.measure_decisions = false;
      jobs.push_back({&p.arch, &p.traces[i], [] { return std::make_unique<EtfScheduler>(); }, o, p.rates[i]});
    }
  }
  std::vector<SimReport> sw_serial;
  std::vector<SimReport> sw_parallel;
  const double sw_s = time_ms([&] { sw_serial = run_jobs(p.apps, jobs, ExecMode::serial); });
  const double sw_p = time_ms([&] { sw_parallel = run_jobs(p.apps, jobs, ExecMode::parallel); });
  rows.push_back({"run_jobs", sw_s, sw_p, same_frames(sw_serial, sw_parallel)});

  std::cout << "threads " << omp_get_max_threads() << (quick ? " (quick)" : "") << "\n";
  std::cout << std::left << std::setw(16) << "kernel" << std::right << std::setw(12) << "serial_ms" << std::setw(13)
            << "parallel_ms" << std::setw(9) << "speedup" << "  identical\n";
  bool ok = true;
  for (const auto& r : rows) {
    ok = ok && r.identical;
    std::cout << std::left << std::setw(16) << r.kernel << std::right << std::fixed << std::setprecision(1)
              << std::setw(12) << r.serial_ms << std::setw(13) << r.parallel_ms << std::setprecision(2) << std::setw(9)
              << r.serial_ms / r.parallel_ms << "  " << (r.identical ? "yes" : "NO") << "\n";
  }
  return ok ? 0 : 1;
}
