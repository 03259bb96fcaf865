#pragma once

// Scaling experiments over the life and traffic workloads, CSV output, and
// plot-ready series.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace parsim::harness {

enum class ScalingKind { strong, weak };
enum class Workload { life, traffic };

ScalingKind parse_scaling_kind(const std::string& name);
Workload parse_workload(const std::string& name);
std::string to_string(ScalingKind k);
std::string to_string(Workload w);

struct LifeParams {
  std::int64_t maxstep = 100;
  double rho = 0.49;
};

struct TrafficParams {
  std::int64_t minutes = 5;
  std::int64_t roads_per_junction = 2;
};

struct ExperimentPlan {
  ScalingKind kind = ScalingKind::strong;
  Workload workload = Workload::life;
  std::vector<std::int64_t> sizes;        // life: L; traffic: junction count
  std::vector<std::int64_t> proc_counts;  // life: subgrids; traffic: shards
  std::int64_t repeats = 10;
  std::uint64_t seed = 1;
  std::string output;  // CSV path, empty for none
  LifeParams life;
  TrafficParams traffic;

  /// Throws ValidationError.
  void validate() const;
};

/// Seed for repeat r of configuration c.
std::uint64_t repeat_seed(std::uint64_t root, std::uint64_t cell, std::uint64_t repeat) noexcept;

struct Row {
  std::int64_t size = 0;
  std::int64_t p = 0;
  std::int64_t repeat = 0;
  double seconds = 0.0;
  bool ok = true;
  std::uint64_t digest = 0;  // fingerprint of the workload output, not written to CSV
  std::string error;
};

struct Aggregate {
  std::int64_t size = 0;
  std::int64_t p = 0;
  std::size_t ok_count = 0;
  std::size_t failed_count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::optional<double> speedup;
  std::optional<double> efficiency;

  bool failed() const noexcept { return ok_count == 0; }
};

struct ExperimentResult {
  ScalingKind kind = ScalingKind::strong;
  Workload workload = Workload::life;
  std::vector<Row> rows;
  std::vector<Aggregate> aggregates;
};

struct CellOutcome {
  double seconds = 0.0;
  std::uint64_t digest = 0;
};

/// Runs one repeat of one configuration. Throwing marks the row failed.
using CellRunner = std::function<CellOutcome(std::int64_t size, std::int64_t p, std::uint64_t seed)>;

CellRunner default_runner(const ExperimentPlan& plan);

/// Process grid for p subgrids of an L x L lattice, closest to square among
/// factorizations whose sides divide L. Throws ValidationError when none.
std::pair<int, int> life_dims(std::int64_t L, std::int64_t p);

ExperimentResult run_experiment(const ExperimentPlan& plan, std::ostream* log = nullptr);
ExperimentResult run_experiment(const ExperimentPlan& plan, const CellRunner& runner,
                                std::ostream* log = nullptr);

/// Aggregates in first-seen configuration order. Strong scaling takes the
/// p = 1 configuration as the baseline; weak scaling has no speedup.
std::vector<Aggregate> compute_aggregates(const std::vector<Row>& rows, ScalingKind kind);

/// Header `workload,kind,size,p,repeat,seconds,status,stddev,speedup,efficiency`.
/// Aggregate rows carry repeat=-1 and status `aggregate`.
void write_csv(const ExperimentResult& result, std::ostream& out);
void write_csv_file(const ExperimentResult& result, const std::string& path);
ExperimentResult read_csv(std::istream& in);
ExperimentResult read_csv_file(const std::string& path);

/// Largest absolute difference between embedded and recomputed aggregate
/// fields. Throws ValidationError when the configuration sets differ.
double aggregate_discrepancy(const ExperimentResult& embedded);

/// Writes `<base>.dat` (columns x mean stddev speedup efficiency, sorted by x,
/// failed configurations listed in a trailing comment) and optionally
/// `<base>.svg`. Returns the paths written.
std::vector<std::string> emit_plot_data(const ExperimentResult& result, const std::string& base,
                                        bool svg);
void write_plot_table(const ExperimentResult& result, std::ostream& out);
void write_plot_svg(const ExperimentResult& result, std::ostream& out);

}  // namespace parsim::harness
