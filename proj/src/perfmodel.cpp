#include "parsim/perfmodel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace parsim::perfmodel {

namespace {

void check_fraction(double f) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw std::domain_error("serial fraction must lie in [0, 1], got " + std::to_string(f));
  }
}

void check_processors(std::int64_t p) {
  if (p < 1) {
    throw std::domain_error("processor count must be >= 1, got " + std::to_string(p));
  }
}

void check_non_negative(double v, const char* what) {
  if (!(v >= 0.0)) {
    throw std::domain_error(std::string(what) + " must be >= 0");
  }
}

}  // namespace

double amdahl_speedup(const AmdahlInput& input) {
  check_fraction(input.serial_fraction);
  check_processors(input.processors);
  const double f = input.serial_fraction;
  const auto p = static_cast<double>(input.processors);
  return 1.0 / (f + (1.0 - f) / p);
}

double gustafson_speedup(double serial_fraction, std::int64_t processors) {
  check_fraction(serial_fraction);
  check_processors(processors);
  const auto p = static_cast<double>(processors);
  return p - serial_fraction * (p - 1.0);
}

SampleStats sample_stats(const std::vector<double>& values) {
  SampleStats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

SpeedupResult measured_speedup(const RunRecord& run) {
  check_processors(run.processors);
  if (!(run.serial_time > 0.0)) throw std::domain_error("serial time must be > 0");
  if (!run.samples.empty() && static_cast<std::int64_t>(run.samples.size()) != run.repeats) {
    throw std::domain_error("repeats must equal the number of samples");
  }

  SpeedupResult r;
  r.mean_parallel_time = run.parallel_time;
  if (!run.samples.empty()) {
    for (double s : run.samples) {
      if (!(s > 0.0)) throw std::domain_error("timing samples must be > 0");
    }
    const SampleStats st = sample_stats(run.samples);
    r.mean_parallel_time = st.mean;
    r.stddev = st.stddev;
  }
  if (!(r.mean_parallel_time > 0.0)) throw std::domain_error("parallel time must be > 0");

  r.speedup = run.serial_time / r.mean_parallel_time;
  r.efficiency = r.speedup / static_cast<double>(run.processors);
  return r;
}

double logp_cost(const LogPParams& params, std::int64_t message_count) {
  check_non_negative(params.latency, "latency");
  check_non_negative(params.overhead, "overhead");
  check_non_negative(params.gap, "gap");
  check_processors(params.processors);
  if (message_count < 1) throw std::domain_error("message count must be >= 1");
  return static_cast<double>(message_count - 1) * params.gap + 2.0 * params.overhead +
         params.latency;
}

double bsp_superstep_cost(const BspSuperstep& step) {
  check_non_negative(step.max_local_work, "local work");
  check_non_negative(step.per_message_gap, "per-message gap");
  check_non_negative(step.barrier_cost, "barrier cost");
  if (step.max_fanout < 0) throw std::domain_error("fan-out must be >= 0");
  return step.max_local_work + step.per_message_gap * static_cast<double>(step.max_fanout) +
         step.barrier_cost;
}

std::vector<std::int64_t> partition_indices(PartitionStrategy strategy, std::int64_t n,
                                            std::int64_t p, std::int64_t block_size) {
  if (n < 1) throw std::domain_error("n must be >= 1");
  if (p < 1) throw std::domain_error("p must be >= 1");
  if (block_size < 1) throw std::domain_error("block size must be >= 1");

  std::vector<std::int64_t> owner(static_cast<std::size_t>(n));
  switch (strategy) {
    case PartitionStrategy::block: {
      // The first (n mod p) owners take one extra index.
      const std::int64_t base = n / p;
      const std::int64_t extra = n % p;
      std::int64_t i = 0;
      for (std::int64_t r = 0; r < p; ++r) {
        const std::int64_t len = base + (r < extra ? 1 : 0);
        for (std::int64_t k = 0; k < len; ++k) owner[static_cast<std::size_t>(i++)] = r;
      }
      break;
    }
    case PartitionStrategy::cyclic:
      for (std::int64_t i = 0; i < n; ++i) owner[static_cast<std::size_t>(i)] = i % p;
      break;
    case PartitionStrategy::block_cyclic:
      for (std::int64_t i = 0; i < n; ++i) {
        owner[static_cast<std::size_t>(i)] = (i / block_size) % p;
      }
      break;
  }
  return owner;
}

PartitionStrategy parse_partition_strategy(std::string_view name) {
  if (name == "block") return PartitionStrategy::block;
  if (name == "cyclic") return PartitionStrategy::cyclic;
  if (name == "block_cyclic" || name == "block-cyclic") return PartitionStrategy::block_cyclic;
  throw std::domain_error("unknown partition strategy '" + std::string(name) + "'");
}

std::string_view to_string(PartitionStrategy s) {
  switch (s) {
    case PartitionStrategy::block: return "block";
    case PartitionStrategy::cyclic: return "cyclic";
    case PartitionStrategy::block_cyclic: return "block_cyclic";
  }
  return "?";
}

}  // namespace parsim::perfmodel
