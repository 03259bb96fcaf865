#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <set>

#include "parsim/errors.hpp"
#include "parsim/hash.hpp"
#include "parsim/network.hpp"
#include "parsim/traffic.hpp"

using namespace parsim;
using namespace parsim::traffic;
using network::parse_network;
using network::RoadNetwork;

namespace {

actor::VehicleTicket ticket(std::uint64_t serial, JunctionId dest, std::int64_t passengers = 3,
                            double fuel = 100.0, double class_speed = 33.0) {
  return actor::VehicleTicket{{actor::ActorKind::vehicle, serial}, 0, class_speed, passengers, dest, fuel};
}

RoadNetwork default_network(std::uint64_t seed) {
  network::GeneratorOptions g;
  g.junctions = 20;
  g.roads = 40;
  g.seed = seed;
  return network::generate_network(g);
}

void expect_conserved(const GlobalCounters& t, std::int64_t active, std::int64_t aboard) {
  EXPECT_EQ(t.vehicles_added,
            active + t.delivered_vehicles + t.crashes + t.fuel_exhausted + t.replan_dead_ends);
  EXPECT_EQ(t.passengers_created, t.passengers_delivered + t.passengers_stranded + aboard);
}

}  // namespace

TEST(Config, DefaultsAndSettings) {
  TrafficConfig cfg;
  EXPECT_EQ(cfg.ticks_per_minute(), 60);
  EXPECT_EQ(cfg.classes.size(), 6u);
  cfg.validate();

  cfg = parse_traffic_config(
      "# comment\nmax_minutes = 5\nfuel_range=10,20\ncrash_beta=0.01\nclass.bus.max_passengers=40\n"
      "spawn_mode=poisson\nseed=9\n");
  EXPECT_EQ(cfg.max_minutes, 5);
  EXPECT_EQ(cfg.fuel_min, 10.0);
  EXPECT_EQ(cfg.fuel_max, 20.0);
  EXPECT_EQ(cfg.crash_beta, 0.01);
  EXPECT_EQ(cfg.classes[1].max_passengers, 40);
  EXPECT_EQ(cfg.spawn_mode, SpawnMode::poisson);
  EXPECT_EQ(cfg.rng_seed, 9u);

  EXPECT_THROW(parse_traffic_config("bogus=1\n"), ValidationError);
  EXPECT_THROW(parse_traffic_config("tick_seconds=7\n"), ValidationError);
  EXPECT_THROW(parse_traffic_config("fuel_range=20,10\n"), ValidationError);
  EXPECT_THROW(parse_traffic_config("class.tram.max_speed=3\n"), ValidationError);
  EXPECT_THROW(parse_traffic_config("max_minutes\n"), ParseError);
}

TEST(AdvanceVehicle, Kinematics) {
  const RoadNetwork net = parse_network("junctions 2\n0 0\n1 0\nroads 1\n0 1 100 20\n");
  VehicleState v;
  v.phase = VehiclePhase::on_road;
  v.road = 0;
  v.position = 5;
  v.speed = 10;
  v.fuel_remaining = 50;
  EXPECT_EQ(advance_vehicle(v, net, 1.0), AdvanceEvent::none);
  EXPECT_EQ(v.position, 15.0);
  EXPECT_EQ(v.fuel_remaining, 49.0);
  EXPECT_EQ(v.speed, 10.0);

  v.position = 95;
  EXPECT_EQ(advance_vehicle(v, net, 1.0), AdvanceEvent::arrived);
  EXPECT_EQ(v.position, 100.0);

  v.position = 0;
  v.fuel_remaining = 0.5;
  EXPECT_EQ(advance_vehicle(v, net, 1.0), AdvanceEvent::fuel_exhausted);
}

TEST(AdvanceVehicle, FuelDrainsWhileWaiting) {
  const RoadNetwork net = parse_network("junctions 2\n0 0\n1 0\nroads 1\n0 1 100 20\n");
  VehicleState v;
  v.phase = VehiclePhase::at_junction;
  v.fuel_remaining = 3;
  EXPECT_EQ(advance_vehicle(v, net, 1.0), AdvanceEvent::none);
  EXPECT_EQ(advance_vehicle(v, net, 1.0), AdvanceEvent::none);
  EXPECT_EQ(v.fuel_remaining, 1.0);
  EXPECT_EQ(advance_vehicle(v, net, 1.0), AdvanceEvent::fuel_exhausted);
}

TEST(Crash, ProbabilityExamplesAndMonotone) {
  EXPECT_EQ(crash_probability(0.5, 1, 1.0), 0.0);
  EXPECT_EQ(crash_probability(0.5, 0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(crash_probability(0.001, 11, 1.0), 0.01);
  EXPECT_EQ(crash_probability(0.5, 100, 1.0), 1.0);
  double prev = crash_probability(0.0005, 0, 1.0);
  for (std::int64_t k = 1; k <= 1000; ++k) {
    const double p = crash_probability(0.0005, k, 1.0);
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(Crash, LoneVehicleNeverDrawsOrCrashes) {
  SplitMix64 rng(3);
  const auto before = rng.state();
  EXPECT_TRUE(crash_check(rng, 1, 1.0, 1.0).empty());
  EXPECT_TRUE(crash_check(rng, 0, 1.0, 1.0).empty());
  EXPECT_EQ(rng.state(), before);
  EXPECT_EQ(crash_check(rng, 5, 1.0, 1.0).size(), 5u);
}

TEST(Lights, RoundRobin) {
  TrafficLight light(3);
  std::vector<std::size_t> seq{light.enabled_index()};
  for (std::uint64_t m = 1; m < 6; ++m) {
    light.rotate(m);
    seq.push_back(light.enabled_index());
    EXPECT_EQ(light.minute_of_last_change(), m);
  }
  EXPECT_EQ(seq, (std::vector<std::size_t>{0, 1, 2, 0, 1, 2}));

  TrafficLight single(1);
  for (std::uint64_t m = 1; m < 5; ++m) {
    single.rotate(m);
    EXPECT_TRUE(single.enabled(0));
  }
  EXPECT_THROW(TrafficLight(0), std::invalid_argument);
}

TEST(Junction, DestinationDelivers) {
  const RoadNetwork net = parse_network("junctions 2\n0 0\n1 0\nroads 1\n0 1 100 10\n");
  TrafficConfig cfg;
  JunctionState j(net, 1, cfg, 1);
  EXPECT_EQ(j.accept(ticket(0, 1, 7), 0), ArrivalOutcome::delivered);
  EXPECT_EQ(j.counters().vehicles_passed, 1);
  EXPECT_EQ(j.waiting_count(), 0u);
}

TEST(Junction, UnreachableDestinationIsDeadEnd) {
  const RoadNetwork net = parse_network("junctions 3\n0 0\n1 0\n2 0\nroads 1\n0 1 100 10\n");
  TrafficConfig cfg;
  JunctionState j(net, 0, cfg, 1);
  EXPECT_EQ(j.accept(ticket(0, 2), 0), ArrivalOutcome::dead_end);
  EXPECT_EQ(j.waiting_count(), 0u);
}

TEST(Junction, NoLightsAdmitsAfterOneTickDwell) {
  const RoadNetwork net = parse_network("junctions 2\n0 0\n1 0\nroads 1\n0 1 100 20\n");
  TrafficConfig cfg;
  cfg.crash_beta = 0.0;
  JunctionState j(net, 0, cfg, 1);
  ASSERT_EQ(j.accept(ticket(0, 1, 3, 100.0, 8.0), 5), ArrivalOutcome::queued);
  EXPECT_TRUE(j.on_tick(5).admitted.empty());
  const auto r = j.on_tick(6);
  ASSERT_EQ(r.admitted.size(), 1u);
  EXPECT_EQ(r.admitted[0].road, 0u);
  EXPECT_EQ(r.admitted[0].speed, 8.0);  // class limit below the road's 20 m/s
  EXPECT_EQ(r.admitted[0].vehicle.ticket.fuel_remaining, 99.0);
  EXPECT_EQ(j.road_counters(0).occupancy, 1);
  EXPECT_EQ(j.road_counters(0).vehicles_total, 1);
  EXPECT_EQ(j.road_counters(0).max_concurrent, 1);
  EXPECT_EQ(j.counters().vehicles_passed, 1);
  j.release(0);
  EXPECT_EQ(j.road_counters(0).occupancy, 0);
  EXPECT_EQ(j.road_counters(0).max_concurrent, 1);
  EXPECT_THROW(j.release(0), std::logic_error);
}

TEST(Junction, AdmissionSpeedUsesCongestion) {
  const RoadNetwork net = parse_network("junctions 2\n0 0\n1 0\nroads 1\n0 1 100 20\n");
  TrafficConfig cfg;
  cfg.crash_beta = 0.0;
  JunctionState j(net, 0, cfg, 1);
  for (std::uint64_t v = 0; v < 10; ++v) j.accept(ticket(v, 1), 0);
  const auto r = j.on_tick(1);
  ASSERT_EQ(r.admitted.size(), 10u);
  for (std::size_t i = 0; i < r.admitted.size(); ++i) {
    EXPECT_DOUBLE_EQ(r.admitted[i].speed, 20.0 / (1.0 + 0.1 * static_cast<double>(i)));
  }
  EXPECT_EQ(j.road_counters(0).max_concurrent, 10);
}

TEST(Junction, LightsHoldVehiclesForDisabledRoad) {
  const RoadNetwork net =
      parse_network("junctions 3\n0 1\n1 0\n2 0\nroads 2\n0 1 100 10\n0 2 100 10\n");
  TrafficConfig cfg;
  JunctionState j(net, 0, cfg, 1);
  ASSERT_NE(j.light(), nullptr);
  EXPECT_EQ(j.light()->enabled_index(), 0u);
  j.accept(ticket(0, 2, 1, 10.0), 0);
  j.accept(ticket(1, 1, 1, 10.0), 0);
  j.accept(ticket(2, 1, 1, 10.0), 0);
  auto r = j.on_tick(1);
  ASSERT_EQ(r.admitted.size(), 1u);  // one per tick onto the enabled road
  EXPECT_EQ(r.admitted[0].vehicle.ticket.vehicle.serial, 1u);
  r = j.on_tick(2);
  ASSERT_EQ(r.admitted.size(), 1u);
  EXPECT_EQ(r.admitted[0].vehicle.ticket.vehicle.serial, 2u);
  EXPECT_TRUE(j.on_tick(3).admitted.empty());
  EXPECT_EQ(j.waiting_on(1), 1u);
  j.rotate_lights(1);
  r = j.on_tick(4);
  ASSERT_EQ(r.admitted.size(), 1u);
  EXPECT_EQ(r.admitted[0].vehicle.ticket.vehicle.serial, 0u);
  EXPECT_TRUE(r.crashed.empty());
}

TEST(Junction, WaitingVehiclesRunOutOfFuel) {
  const RoadNetwork net =
      parse_network("junctions 3\n0 1\n1 0\n2 0\nroads 2\n0 1 100 10\n0 2 100 10\n");
  TrafficConfig cfg;
  JunctionState j(net, 0, cfg, 1);
  j.accept(ticket(0, 2, 4, 2.0), 0);
  EXPECT_TRUE(j.on_tick(1).out_of_fuel.empty());
  const auto r = j.on_tick(2);
  ASSERT_EQ(r.out_of_fuel.size(), 1u);
  EXPECT_EQ(j.waiting_count(), 0u);
}

TEST(Junction, CrashesOnlyWithoutLights) {
  const RoadNetwork net = parse_network(
      "junctions 3\n0 0\n1 1\n2 0\nroads 4\n0 2 100 10\n1 2 100 10\n2 0 100 10\n2 1 100 10\n");
  TrafficConfig cfg;
  cfg.crash_beta = 1.0;  // certain crash for k >= 2
  JunctionState plain(net, 0, cfg, 1);
  JunctionState lit(net, 1, cfg, 1);
  for (std::uint64_t v = 0; v < 4; ++v) {
    plain.accept(ticket(v, 2), 0);
    lit.accept(ticket(v, 2), 0);
  }
  const auto a = plain.on_tick(1);
  EXPECT_EQ(a.crashed.size(), 4u);
  EXPECT_EQ(plain.counters().crashes, 4);
  const auto b = lit.on_tick(1);
  EXPECT_TRUE(b.crashed.empty());
  EXPECT_EQ(lit.counters().crashes, 0);
}

TEST(Spawn, SingleRoadForcesPair) {
  const RoadNetwork net = parse_network("junctions 2\n0 0\n1 0\nroads 1\n0 1 100 10\n");
  TrafficConfig cfg;
  SpawnPlanner planner(net, cfg, 42);
  for (std::uint64_t m = 0; m < 5; ++m) {
    const auto w = planner.spawn_wave(m);
    EXPECT_EQ(w.failures, 0);
    ASSERT_EQ(w.vehicles.size(), 10u);
    for (const auto& s : w.vehicles) {
      EXPECT_EQ(s.source, 0u);
      EXPECT_EQ(s.destination, 1u);
      EXPECT_GE(s.passengers, 1);
      EXPECT_LE(s.passengers, cfg.classes[s.class_index].max_passengers);
      EXPECT_GE(s.fuel, cfg.fuel_min);
      EXPECT_LE(s.fuel, cfg.fuel_max);
    }
  }
}

TEST(Spawn, NoRoadsMeansEveryAttemptFails) {
  const RoadNetwork net = parse_network("junctions 3\n0 0\n1 0\n2 0\nroads 0\n");
  TrafficConfig cfg;
  SpawnPlanner planner(net, cfg, 42);
  const auto w = planner.spawn_wave(0);
  EXPECT_TRUE(w.vehicles.empty());
  EXPECT_EQ(w.failures, cfg.spawn_per_minute);
}

TEST(Spawn, SeededReplay) {
  const RoadNetwork net = default_network(3);
  TrafficConfig cfg;
  cfg.spawn_mode = SpawnMode::poisson;
  SpawnPlanner a(net, cfg, 77);
  SpawnPlanner b(net, cfg, 77);
  std::set<std::uint32_t> classes;
  for (std::uint64_t m = 0; m < 20; ++m) {
    const auto wa = a.spawn_wave(m);
    const auto wb = b.spawn_wave(m);
    ASSERT_EQ(wa.vehicles.size(), wb.vehicles.size());
    for (std::size_t i = 0; i < wa.vehicles.size(); ++i) {
      EXPECT_EQ(wa.vehicles[i].source, wb.vehicles[i].source);
      EXPECT_EQ(wa.vehicles[i].destination, wb.vehicles[i].destination);
      EXPECT_EQ(wa.vehicles[i].fuel, wb.vehicles[i].fuel);
      EXPECT_NE(wa.vehicles[i].source, wa.vehicles[i].destination);
      classes.insert(wa.vehicles[i].class_index);
    }
  }
  EXPECT_EQ(classes.size(), 6u);
}

TEST(Summary, Format) {
  GlobalCounters t;
  EXPECT_EQ(emit_summary(t, 0), "[minute=0] added=0 delivered=0 stranded=0 crashes=0 no_fuel=0\n");
  t.vehicles_added = 4;
  t.passengers_delivered = 3;
  t.passengers_stranded = 2;
  t.crashes = 1;
  t.fuel_exhausted = 5;
  EXPECT_EQ(emit_summary(t, 10), "[minute=10] added=4 delivered=3 stranded=2 crashes=1 no_fuel=5\n");
}

TEST(Simulation, ZeroMinutesShutsDownImmediately) {
  const RoadNetwork net = default_network(7);
  TrafficConfig cfg;
  cfg.max_minutes = 0;
  TrafficSimulation sim(net, cfg);
  const auto r = sim.run();
  EXPECT_EQ(r.summary_text, "[minute=0] added=0 delivered=0 stranded=0 crashes=0 no_fuel=0\n");
  EXPECT_EQ(r.runtime.ticks_elapsed(), 0u);
  for (const auto& j : r.stats.per_junction) {
    EXPECT_EQ(j.crashes, 0);
    EXPECT_EQ(j.vehicles_passed, 0);
  }
  for (const auto& road : r.stats.per_road) {
    EXPECT_EQ(road.vehicles_total, 0);
    EXPECT_EQ(road.max_concurrent, 0);
  }
}

TEST(Simulation, SingleVehicleTraversesOneRoad) {
  const RoadNetwork net = parse_network("junctions 2\n0 0\n1 0\nroads 1\n0 1 100 10\n");
  TrafficConfig cfg;
  cfg.max_minutes = 1;
  cfg.spawn_per_minute = 1;
  TrafficSimulation sim(net, cfg);
  const auto r = sim.run();
  EXPECT_EQ(r.stats.totals.vehicles_added, 1);
  EXPECT_EQ(r.stats.totals.delivered_vehicles, 1);
  EXPECT_EQ(r.stats.per_road[0].vehicles_total, 1);
  EXPECT_EQ(r.stats.per_road[0].max_concurrent, 1);
  EXPECT_EQ(r.stats.per_road[0].occupancy, 0);
  EXPECT_EQ(format_final_stats(r.stats, net),
            "kind,id_a,id_b,metric1,metric2\njunction,0,,0,1\njunction,1,,0,1\nroad,0,1,1,1\n");
}

TEST(Simulation, SummarySchedule) {
  const RoadNetwork net = default_network(7);
  TrafficConfig cfg;
  cfg.max_minutes = 25;
  cfg.rng_seed = 7;
  std::vector<std::string> lines;
  SimOptions opts;
  opts.on_summary = [&](const std::string& l) { lines.push_back(l); };
  TrafficSimulation sim(net, cfg, opts);
  const auto r = sim.run();
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0].rfind("[minute=0]", 0), 0u);
  EXPECT_EQ(lines[1].rfind("[minute=10]", 0), 0u);
  EXPECT_EQ(lines[2].rfind("[minute=20]", 0), 0u);
  EXPECT_EQ(lines[3].rfind("[minute=25]", 0), 0u);
  EXPECT_EQ(r.audits.size(), 26u);
}

TEST(Simulation, ConservationEveryTick) {
  const RoadNetwork net = default_network(7);
  TrafficConfig cfg;
  cfg.max_minutes = 30;
  cfg.rng_seed = 7;
  SimOptions opts;
  std::int64_t checked = 0;
  opts.on_tick_end = [&](std::uint64_t, const TrafficSimulation& s) {
    expect_conserved(s.totals(), s.active_vehicles(), s.passengers_aboard());
    for (JunctionId j = 0; j < net.junction_count(); ++j) {
      const auto& st = s.junction(j);
      for (std::size_t i = 0; i < st.outgoing().size(); ++i) {
        EXPECT_GE(st.road_counters(i).max_concurrent, st.road_counters(i).occupancy);
      }
    }
    ++checked;
  };
  TrafficSimulation sim(net, cfg, opts);
  const auto r = sim.run();
  EXPECT_EQ(checked, 30 * 60);
  for (const auto& a : r.audits) expect_conserved(a.totals, a.active_vehicles, a.passengers_aboard);
  EXPECT_EQ(r.stats.totals.vehicles_added, 300);
  EXPECT_GT(r.stats.totals.delivered_vehicles, 0);
}

TEST(Simulation, ConservationUnderCrashesAndFuelLoss) {
  const RoadNetwork net = default_network(11);
  TrafficConfig cfg;
  cfg.max_minutes = 8;
  cfg.rng_seed = 11;
  cfg.spawn_per_minute = 40;
  cfg.crash_beta = 0.3;
  cfg.fuel_min = 20;
  cfg.fuel_max = 90;
  SimOptions opts;
  opts.on_tick_end = [&](std::uint64_t, const TrafficSimulation& s) {
    expect_conserved(s.totals(), s.active_vehicles(), s.passengers_aboard());
  };
  TrafficSimulation sim(net, cfg, opts);
  const auto r = sim.run();
  EXPECT_GT(r.stats.totals.crashes, 0);
  EXPECT_GT(r.stats.totals.fuel_exhausted, 0);
  EXPECT_GT(r.stats.totals.passengers_stranded, 0);
  std::int64_t per_junction = 0;
  for (const auto& j : r.stats.per_junction) per_junction += j.crashes;
  EXPECT_EQ(per_junction, r.stats.totals.crashes);
  EXPECT_EQ(r.runtime.sent,
            r.runtime.delivered + r.runtime.dropped + r.runtime.in_flight_at_shutdown);
}

TEST(Simulation, LightsRotateOncePerMinute) {
  const RoadNetwork net = parse_network(
      "junctions 4\n0 1\n1 0\n2 0\n3 0\nroads 6\n0 1 100 10\n0 2 100 10\n0 3 100 10\n"
      "1 0 100 10\n2 0 100 10\n3 0 100 10\n");
  TrafficConfig cfg;
  cfg.max_minutes = 6;
  SimOptions opts;
  std::vector<std::size_t> per_minute;
  opts.on_tick_end = [&](std::uint64_t tick, const TrafficSimulation& s) {
    const TrafficLight* light = s.junction(0).light();
    ASSERT_NE(light, nullptr);
    int enabled = 0;
    for (std::size_t i = 0; i < light->road_count(); ++i) enabled += light->enabled(i) ? 1 : 0;
    EXPECT_EQ(enabled, 1);
    EXPECT_EQ(light->enabled_index(), (tick / 60) % 3);
    if (tick % 60 == 0) per_minute.push_back(light->enabled_index());
  };
  TrafficSimulation sim(net, cfg, opts);
  sim.run();
  EXPECT_EQ(per_minute, (std::vector<std::size_t>{0, 1, 2, 0, 1, 2}));
}

TEST(Simulation, DeterministicAcrossRunsAndShardCounts) {
  const RoadNetwork net = default_network(7);
  TrafficConfig cfg;
  cfg.max_minutes = 30;
  cfg.rng_seed = 7;
  auto run = [&](std::uint32_t shards, actor::ExecutionMode mode) {
    SimOptions opts;
    opts.shards = shards;
    opts.mode = mode;
    TrafficSimulation sim(net, cfg, opts);
    auto r = sim.run();
    return std::make_pair(r.summary_text, format_final_stats(r.stats, net));
  };
  const auto ref = run(1, actor::ExecutionMode::deterministic);
  EXPECT_EQ(run(1, actor::ExecutionMode::deterministic), ref);
  EXPECT_EQ(run(4, actor::ExecutionMode::deterministic), ref);
  EXPECT_EQ(run(4, actor::ExecutionMode::parallel), ref);
}

TEST(Simulation, FinalStatsFileMatchesFormatter) {
  const RoadNetwork net = default_network(5);
  TrafficConfig cfg;
  cfg.max_minutes = 2;
  TrafficSimulation sim(net, cfg);
  const auto r = sim.run();
  const std::string path = ::testing::TempDir() + "parsim_stats.csv";
  write_final_stats(r.stats, net, path);
  std::ifstream in(path);
  const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(body, format_final_stats(r.stats, net));
  EXPECT_THROW(write_final_stats(r.stats, net, "/nonexistent/dir/x.csv"), std::runtime_error);
}
