#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "parsim/errors.hpp"
#include "parsim/network.hpp"

using namespace parsim::network;
using parsim::ParseError;
using parsim::ValidationError;

namespace {

const char* kTriangle =
    "# A=0 B=1 C=2\n"
    "junctions 3\n"
    "0 0\n"
    "1 0\n"
    "2 1\n"
    "roads 3\n"
    "0 1 10 10\n"
    "1 2 10 10\n"
    "0 2 25 10\n";

struct Best {
  double time = std::numeric_limits<double>::infinity();
  std::vector<JunctionId> path;
};

// Exhaustive simple-path search with the same first-hop weighting.
void enumerate(const RoadNetwork& net, JunctionId at, JunctionId dest, const CongestionModel& m,
               std::vector<JunctionId>& path, std::vector<RoadId>& roads, std::vector<bool>& seen,
               Best& best) {
  if (at == dest) {
    double t = 0.0;
    for (std::size_t i = 0; i < roads.size(); ++i) {
      const Road& r = net.road(roads[i]);
      t += r.length / (i == 0 ? current_speed(r, m) : r.max_speed);
    }
    if (t < best.time) best = {t, path};
    return;
  }
  for (RoadId rid : net.outgoing(at)) {
    const Road& r = net.road(rid);
    if (seen[r.to]) continue;
    seen[r.to] = true;
    path.push_back(r.to);
    roads.push_back(rid);
    enumerate(net, r.to, dest, m, path, roads, seen, best);
    roads.pop_back();
    path.pop_back();
    seen[r.to] = false;
  }
}

Best brute_force(const RoadNetwork& net, JunctionId from, JunctionId to, const CongestionModel& m) {
  Best best;
  std::vector<JunctionId> path{from};
  std::vector<RoadId> roads;
  std::vector<bool> seen(net.junction_count(), false);
  seen[from] = true;
  enumerate(net, from, to, m, path, roads, seen, best);
  return best;
}

RoadNetwork random_network(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nj(1, 8);
  const int n = nj(rng);
  std::uniform_int_distribution<int> nr(0, 16);
  const int m = nr(rng);
  std::vector<Junction> js;
  for (int i = 0; i < n; ++i) js.push_back({static_cast<JunctionId>(i), (rng() & 1) != 0, {}});
  std::vector<Road> rs;
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_int_distribution<int> len(1, 20);
  std::uniform_int_distribution<int> spd(1, 5);
  std::uniform_int_distribution<int> occ(0, 30);
  for (int k = 0; k < m; ++k) {
    Road r;
    r.id = static_cast<RoadId>(k);
    r.from = static_cast<JunctionId>(pick(rng));
    r.to = static_cast<JunctionId>(pick(rng));
    r.length = len(rng) * 10.0;
    r.max_speed = spd(rng) * 5.0;
    r.vehicle_count = occ(rng);
    rs.push_back(r);
  }
  return RoadNetwork(js, rs);
}

}  // namespace

TEST(Parse, MinimalNetwork) {
  const RoadNetwork net = parse_network("junctions 2\n0 0\n1 1\nroads 1\n0 1 100 10\n");
  EXPECT_EQ(net.junction_count(), 2u);
  ASSERT_EQ(net.road_count(), 1u);
  EXPECT_EQ(net.road(0).from, 0u);
  EXPECT_EQ(net.road(0).to, 1u);
  EXPECT_EQ(net.road(0).length, 100.0);
  EXPECT_EQ(net.road(0).max_speed, 10.0);
  EXPECT_TRUE(net.junction(1).has_traffic_lights);
  EXPECT_EQ(net.outgoing(0), std::vector<RoadId>{0});
}

TEST(Parse, RejectsInvalidNetworks) {
  EXPECT_THROW(parse_network("junctions 2\n0 0\n1 0\nroads 1\n0 9 100 10\n"), ValidationError);
  EXPECT_THROW(parse_network("junctions 2\n0 0\n1 0\nroads 1\n0 1 -5 10\n"), ValidationError);
  EXPECT_THROW(parse_network("junctions 2\n0 0\n1 0\nroads 1\n0 1 5 0\n"), ValidationError);
  EXPECT_THROW(parse_network("junctions 2\n0 0\n0 0\nroads 0\n"), ValidationError);
}

TEST(Parse, ReportsLineNumbers) {
  try {
    parse_network("junctions 2\n0 0\n# comment\n1 x\nroads 0\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW(parse_network("roads 0\n"), ParseError);
  EXPECT_THROW(parse_network("junctions 1\n0 0\nroads 1\n"), ParseError);
}

TEST(Parse, OutgoingFollowsFileOrder) {
  const RoadNetwork net =
      parse_network("junctions 4\n3 0\n0 1\n2 0\n1 0\nroads 3\n0 3 10 1\n0 1 10 1\n0 2 10 1\n");
  EXPECT_EQ(net.outgoing(0), (std::vector<RoadId>{0, 1, 2}));
  EXPECT_EQ(net.road(1).to, 1u);
}

TEST(Parse, RoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const RoadNetwork net = random_network(rng);
    const RoadNetwork again = parse_network(serialize_network(net));
    EXPECT_EQ(net, again);
    EXPECT_EQ(serialize_network(again), serialize_network(net));
  }
  GeneratorOptions opts;
  opts.seed = 99;
  const RoadNetwork gen = generate_network(opts);
  EXPECT_EQ(parse_network(serialize_network(gen)), gen);
}

TEST(Congestion, Examples) {
  const CongestionModel m;
  Road r;
  r.max_speed = 30;
  EXPECT_EQ(current_speed(r, m), 30.0);
  r.vehicle_count = 10;
  EXPECT_DOUBLE_EQ(current_speed(r, m), 15.0);
  r.vehicle_count = 1000000;
  EXPECT_EQ(current_speed(r, m), 1.0);
}

TEST(Congestion, MonotoneAndBounded) {
  const CongestionModel m{0.25, 2.0};
  for (double vmax : {1.0, 2.0, 13.4, 31.3}) {
    double prev = m.speed(vmax, 0);
    EXPECT_EQ(prev, vmax);
    for (std::int64_t n = 1; n < 500; ++n) {
      const double v = m.speed(vmax, n);
      EXPECT_LE(v, prev);
      EXPECT_LE(v, vmax);
      EXPECT_GE(v, std::min(vmax, m.speed_floor));
      prev = v;
    }
  }
}

TEST(Reachable, Examples) {
  const RoadNetwork one = parse_network("junctions 2\n0 0\n1 0\nroads 1\n0 1 1 1\n");
  EXPECT_TRUE(reachable(one, 1, 1));
  EXPECT_TRUE(reachable(one, 0, 1));
  EXPECT_FALSE(reachable(one, 1, 0));
  const RoadNetwork chain = parse_network("junctions 3\n0 0\n1 0\n2 0\nroads 2\n0 1 1 1\n1 2 1 1\n");
  EXPECT_TRUE(reachable(chain, 0, 2));
  EXPECT_FALSE(reachable(chain, 2, 0));
  EXPECT_THROW(reachable(chain, 0, 7), UnknownJunction);

  ReachabilityCache cache(chain);
  for (JunctionId a = 0; a < 3; ++a) {
    for (JunctionId b = 0; b < 3; ++b) EXPECT_EQ(cache.reachable(a, b), reachable(chain, a, b));
  }
}

TEST(PlanRoute, SingleRoad) {
  const RoadNetwork net = parse_network("junctions 2\n0 0\n1 0\nroads 1\n0 1 100 10\n");
  const Route r = plan_route(net, 0, 1);
  EXPECT_EQ(r.junctions, (std::vector<JunctionId>{0, 1}));
  EXPECT_EQ(r.roads, std::vector<RoadId>{0});
  EXPECT_DOUBLE_EQ(r.predicted_time, 10.0);
  EXPECT_THROW(plan_route(net, 1, 0), NoRoute);
}

TEST(PlanRoute, TrianglePrefersTwoFastHops) {
  const RoadNetwork net = parse_network(kTriangle);
  const Route r = plan_route(net, 0, 2);
  EXPECT_EQ(r.junctions, (std::vector<JunctionId>{0, 1, 2}));
  EXPECT_DOUBLE_EQ(r.predicted_time, 2.0);
}

TEST(PlanRoute, CongestedFirstHopSwitchesToDirectRoad) {
  RoadNetwork net = parse_network(kTriangle);
  net.road(0).vehicle_count = 40;  // 10 / (1 + 0.1 * 40) = 2 m/s
  EXPECT_DOUBLE_EQ(current_speed(net.road(0)), 2.0);
  const Route r = plan_route(net, 0, 2);
  EXPECT_EQ(r.junctions, (std::vector<JunctionId>{0, 2}));
  EXPECT_DOUBLE_EQ(r.predicted_time, 2.5);
}

TEST(PlanRoute, TiesPreferFewerRoadsThenLexicographic) {
  // 0->1->3 and 0->3 both take 2 s; 0->1->3 and 0->2->3 tie on hops too.
  const RoadNetwork net = parse_network(
      "junctions 4\n0 0\n1 0\n2 0\n3 0\nroads 5\n0 2 10 10\n2 3 10 10\n0 1 10 10\n1 3 10 10\n"
      "0 3 20 10\n");
  EXPECT_EQ(plan_route(net, 0, 3).junctions, (std::vector<JunctionId>{0, 3}));
  const RoadNetwork no_direct = parse_network(
      "junctions 4\n0 0\n1 0\n2 0\n3 0\nroads 4\n0 2 10 10\n2 3 10 10\n0 1 10 10\n1 3 10 10\n");
  EXPECT_EQ(plan_route(no_direct, 0, 3).junctions, (std::vector<JunctionId>{0, 1, 3}));
}

TEST(PlanRoute, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(2024);
  const CongestionModel m;
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const RoadNetwork net = random_network(rng);
    for (JunctionId a = 0; a < net.junction_count(); ++a) {
      for (JunctionId b = 0; b < net.junction_count(); ++b) {
        const Best best = brute_force(net, a, b, m);
        if (!reachable(net, a, b)) {
          EXPECT_THROW(plan_route(net, a, b, m), NoRoute);
          continue;
        }
        const Route r = plan_route(net, a, b, m);
        ASSERT_EQ(r.predicted_time, best.time) << "trial " << trial << " " << a << "->" << b;
        ASSERT_EQ(r.junctions.size(), r.roads.size() + 1);
        for (std::size_t i = 0; i < r.roads.size(); ++i) {
          const Road& road = net.road(r.roads[i]);
          ASSERT_EQ(road.from, r.junctions[i]);
          ASSERT_EQ(road.to, r.junctions[i + 1]);
        }
        ++compared;
      }
    }
  }
  EXPECT_GT(compared, 1000);
}

TEST(Generator, DeterministicAndStronglyConnected) {
  GeneratorOptions opts;
  opts.seed = 7;
  const RoadNetwork a = generate_network(opts);
  const RoadNetwork b = generate_network(opts);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.junction_count(), 20u);
  EXPECT_EQ(a.road_count(), 40u);
  for (JunctionId x = 0; x < a.junction_count(); ++x) {
    for (JunctionId y = 0; y < a.junction_count(); ++y) EXPECT_TRUE(reachable(a, x, y));
  }
  for (const Road& r : a.roads()) EXPECT_NE(r.from, r.to);
}
