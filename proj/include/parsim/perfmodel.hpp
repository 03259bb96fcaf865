#pragma once

// Closed-form parallel performance laws, communication cost models and
// index partitioning. All functions are pure and throw std::domain_error on
// inputs outside their domain.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace parsim::perfmodel {

struct AmdahlInput {
  double serial_fraction = 0.0;  // f in [0, 1]
  std::int64_t processors = 1;   // P >= 1
};

struct LogPParams {
  double latency = 0.0;   // L
  double overhead = 0.0;  // o
  double gap = 0.0;       // g
  std::int64_t processors = 1;
};

struct BspSuperstep {
  double max_local_work = 0.0;   // w
  std::int64_t max_fanout = 0;   // h, max messages sent or received by any processor
  double per_message_gap = 0.0;  // g
  double barrier_cost = 0.0;     // l
};

struct RunRecord {
  double serial_time = 0.0;    // T1
  double parallel_time = 0.0;  // Tp, replaced by mean(samples) when samples are present
  std::int64_t processors = 1;
  std::int64_t repeats = 1;
  std::vector<double> samples;
};

struct SpeedupResult {
  double speedup = 0.0;
  double efficiency = 0.0;
  double mean_parallel_time = 0.0;
  std::optional<double> stddev;  // sample stddev of Tp, present when samples were given
};

enum class PartitionStrategy { block, cyclic, block_cyclic };

/// 1 / (f + (1 - f) / P)
double amdahl_speedup(const AmdahlInput& input);
inline double amdahl_speedup(double f, std::int64_t p) { return amdahl_speedup({f, p}); }

/// Scaled speedup P - f (P - 1).
double gustafson_speedup(double serial_fraction, std::int64_t processors);

SpeedupResult measured_speedup(const RunRecord& run);

/// Receive time of the last of k back-to-back messages from one sender:
/// (k - 1) g + 2 o + L.
double logp_cost(const LogPParams& params, std::int64_t message_count);

/// w + g h + l
double bsp_superstep_cost(const BspSuperstep& step);

/// Owner rank for each of n indices. `block_size` is only read for block_cyclic.
std::vector<std::int64_t> partition_indices(PartitionStrategy strategy, std::int64_t n,
                                            std::int64_t p, std::int64_t block_size = 1);

PartitionStrategy parse_partition_strategy(std::string_view name);
std::string_view to_string(PartitionStrategy s);

/// Mean and sample standard deviation (n - 1 denominator; 0 for a single value).
struct SampleStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};
SampleStats sample_stats(const std::vector<double>& values);

}  // namespace parsim::perfmodel
