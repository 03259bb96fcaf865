#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "parsim/perfmodel.hpp"

using namespace parsim::perfmodel;

namespace {
constexpr double kTol = 1e-12;
}

TEST(Amdahl, Examples) {
  EXPECT_NEAR(amdahl_speedup(0.0, 8), 8.0, kTol);
  EXPECT_NEAR(amdahl_speedup(1.0, 64), 1.0, kTol);
  EXPECT_NEAR(amdahl_speedup(0.5, 2), 4.0 / 3.0, kTol);
  EXPECT_NEAR(amdahl_speedup(0.05, 16), 1.0 / (0.05 + 0.95 / 16.0), kTol);
  EXPECT_NEAR(amdahl_speedup(AmdahlInput{0.1, 1000000000}), 10.0, 1e-6);
  EXPECT_LT(amdahl_speedup(AmdahlInput{0.1, 1000000000}), 10.0);
}

TEST(Amdahl, RejectsOutOfDomain) {
  EXPECT_THROW(amdahl_speedup(-0.1, 4), std::domain_error);
  EXPECT_THROW(amdahl_speedup(1.1, 4), std::domain_error);
  EXPECT_THROW(amdahl_speedup(0.5, 0), std::domain_error);
}

TEST(Amdahl, MonotoneAndBounded) {
  for (std::int64_t p : {1, 2, 3, 8, 64, 1024}) {
    double prev = amdahl_speedup(0.0, p);
    for (int i = 0; i <= 100; ++i) {
      const double f = i / 100.0;
      const double s = amdahl_speedup(f, p);
      EXPECT_LE(s, prev + kTol);
      EXPECT_GE(s, 1.0 - kTol);
      EXPECT_LE(s, static_cast<double>(p) + kTol);
      if (f > 0) EXPECT_LE(s, 1.0 / f + kTol);
      prev = s;
    }
  }
  for (int i = 0; i <= 20; ++i) {
    const double f = i / 20.0;
    double prev = 0.0;
    for (std::int64_t p = 1; p <= 256; ++p) {
      const double s = amdahl_speedup(f, p);
      EXPECT_GE(s, prev - kTol);
      prev = s;
    }
  }
}

TEST(Gustafson, Examples) {
  EXPECT_NEAR(gustafson_speedup(0.0, 16), 16.0, kTol);
  EXPECT_NEAR(gustafson_speedup(1.0, 16), 1.0, kTol);
  EXPECT_NEAR(gustafson_speedup(0.1, 10), 9.1, kTol);
  EXPECT_THROW(gustafson_speedup(2.0, 3), std::domain_error);
  EXPECT_THROW(gustafson_speedup(0.2, 0), std::domain_error);
}

TEST(Gustafson, DominatesAmdahl) {
  for (int i = 1; i < 100; ++i) {
    const double f = i / 100.0;
    for (std::int64_t p = 2; p <= 128; p *= 2) {
      EXPECT_GE(gustafson_speedup(f, p), amdahl_speedup(f, p));
    }
  }
}

TEST(MeasuredSpeedup, Examples) {
  auto r = measured_speedup({100.0, 25.0, 4, 1, {}});
  EXPECT_NEAR(r.speedup, 4.0, kTol);
  EXPECT_NEAR(r.efficiency, 1.0, kTol);
  EXPECT_FALSE(r.stddev.has_value());

  r = measured_speedup({120.0, 40.0, 4, 1, {}});
  EXPECT_NEAR(r.speedup, 3.0, kTol);
  EXPECT_NEAR(r.efficiency, 0.75, kTol);

  r = measured_speedup({50.0, 50.0, 1, 1, {}});
  EXPECT_NEAR(r.speedup, 1.0, kTol);
  EXPECT_NEAR(r.efficiency, 1.0, kTol);
}

TEST(MeasuredSpeedup, UsesSampleMeanAndStddev) {
  const auto r = measured_speedup({12.0, 0.0, 2, 3, {2.0, 4.0, 6.0}});
  EXPECT_NEAR(r.mean_parallel_time, 4.0, kTol);
  EXPECT_NEAR(r.speedup, 3.0, kTol);
  EXPECT_EQ(r.efficiency, r.speedup / 2.0);
  ASSERT_TRUE(r.stddev.has_value());
  EXPECT_NEAR(*r.stddev, 2.0, kTol);
  EXPECT_LE(r.efficiency, r.speedup);
}

TEST(MeasuredSpeedup, RejectsBadRecords) {
  EXPECT_THROW(measured_speedup({0.0, 1.0, 1, 1, {}}), std::domain_error);
  EXPECT_THROW(measured_speedup({1.0, -1.0, 1, 1, {}}), std::domain_error);
  EXPECT_THROW(measured_speedup({1.0, 1.0, 0, 1, {}}), std::domain_error);
  EXPECT_THROW(measured_speedup({1.0, 1.0, 2, 3, {1.0, 1.0}}), std::domain_error);
}

TEST(LogP, Examples) {
  EXPECT_NEAR(logp_cost({5, 2, 4, 1}, 1), 9.0, kTol);
  EXPECT_NEAR(logp_cost({5, 2, 4, 1}, 3), 17.0, kTol);
  for (std::int64_t k = 1; k < 50; ++k) EXPECT_EQ(logp_cost({0, 0, 0, 1}, k), 0.0);
  EXPECT_THROW(logp_cost({5, 2, 4, 1}, 0), std::domain_error);
  EXPECT_THROW(logp_cost({-1, 2, 4, 1}, 1), std::domain_error);
}

TEST(LogP, MonotoneInEveryParameter) {
  const double base = logp_cost({5, 2, 4, 1}, 3);
  EXPECT_GE(logp_cost({6, 2, 4, 1}, 3), base);
  EXPECT_GE(logp_cost({5, 3, 4, 1}, 3), base);
  EXPECT_GE(logp_cost({5, 2, 5, 1}, 3), base);
  EXPECT_GE(logp_cost({5, 2, 4, 1}, 4), base);
}

TEST(Bsp, Examples) {
  EXPECT_NEAR(bsp_superstep_cost({0, 0, 0, 0}), 0.0, kTol);
  EXPECT_NEAR(bsp_superstep_cost({100, 10, 2, 50}), 170.0, kTol);
  EXPECT_NEAR(bsp_superstep_cost({100, 0, 99, 0}), 100.0, kTol);
  EXPECT_THROW(bsp_superstep_cost({-1, 0, 0, 0}), std::domain_error);
  EXPECT_THROW(bsp_superstep_cost({0, -1, 0, 0}), std::domain_error);
}

TEST(Bsp, MonotoneInEveryParameter) {
  const double base = bsp_superstep_cost({100, 10, 2, 50});
  EXPECT_GE(bsp_superstep_cost({101, 10, 2, 50}), base);
  EXPECT_GE(bsp_superstep_cost({100, 11, 2, 50}), base);
  EXPECT_GE(bsp_superstep_cost({100, 10, 3, 50}), base);
  EXPECT_GE(bsp_superstep_cost({100, 10, 2, 51}), base);
}

TEST(Partition, Examples) {
  using V = std::vector<std::int64_t>;
  EXPECT_EQ(partition_indices(PartitionStrategy::cyclic, 6, 2), (V{0, 1, 0, 1, 0, 1}));
  EXPECT_EQ(partition_indices(PartitionStrategy::block, 10, 3), (V{0, 0, 0, 0, 1, 1, 1, 2, 2, 2}));
  EXPECT_EQ(partition_indices(PartitionStrategy::block_cyclic, 8, 2, 2),
            (V{0, 0, 1, 1, 0, 0, 1, 1}));
  EXPECT_THROW(partition_indices(PartitionStrategy::block, 0, 2), std::domain_error);
  EXPECT_THROW(partition_indices(PartitionStrategy::block, 4, 0), std::domain_error);
  EXPECT_THROW(partition_indices(PartitionStrategy::block_cyclic, 4, 2, 0), std::domain_error);
}

TEST(Partition, Properties) {
  for (std::int64_t n = 1; n <= 64; ++n) {
    for (std::int64_t p = 1; p <= 8; ++p) {
      for (std::int64_t b = 1; b <= 8; ++b) {
        for (auto s : {PartitionStrategy::block, PartitionStrategy::cyclic,
                       PartitionStrategy::block_cyclic}) {
          const auto owners = partition_indices(s, n, p, b);
          ASSERT_EQ(static_cast<std::int64_t>(owners.size()), n);
          std::vector<std::int64_t> sizes(static_cast<std::size_t>(p), 0);
          for (std::int64_t i = 0; i < n; ++i) {
            const auto o = owners[static_cast<std::size_t>(i)];
            ASSERT_GE(o, 0);
            ASSERT_LT(o, p);
            ++sizes[static_cast<std::size_t>(o)];
            if (s == PartitionStrategy::cyclic) ASSERT_EQ(o, i % p);
            if (s == PartitionStrategy::block_cyclic) ASSERT_EQ(o, (i / b) % p);
          }
          if (s == PartitionStrategy::block) {
            ASSERT_TRUE(std::is_sorted(owners.begin(), owners.end()));
            for (std::int64_t r = 0; r < p; ++r) {
              const auto expect = n / p + (r < n % p ? 1 : 0);
              ASSERT_EQ(sizes[static_cast<std::size_t>(r)], expect);
            }
          }
          if (s != PartitionStrategy::block_cyclic) {
            const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
            ASSERT_LE(*hi - *lo, 1);
          }
        }
      }
    }
  }
}

TEST(Partition, StrategyNames) {
  EXPECT_EQ(parse_partition_strategy("block_cyclic"), PartitionStrategy::block_cyclic);
  EXPECT_EQ(to_string(PartitionStrategy::cyclic), "cyclic");
  EXPECT_THROW(parse_partition_strategy("diagonal"), std::domain_error);
}

TEST(SampleStats, MeanAndSampleStddev) {
  const auto s = sample_stats({1.0, 2.0, 3.0, 4.0});
  EXPECT_NEAR(s.mean, 2.5, kTol);
  EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), kTol);
  EXPECT_EQ(sample_stats({7.0}).stddev, 0.0);
}
