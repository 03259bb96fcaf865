#pragma once

// Road-traffic simulation on top of the actor runtime.
//
// Entity logic lives in plain value types (VehicleState, JunctionState,
// TrafficLight, SpawnPlanner). The actors in traffic_sim.cpp translate
// messages into calls on them.
//
// Ownership: a junction owns its lights, its waiting vehicles, its crash
// rolls and the occupancy counters of the roads that leave it. Vehicles own
// their position, speed and fuel. The director owns the clock, spawning and
// the global counters.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parsim/actor.hpp"
#include "parsim/config.hpp"
#include "parsim/hash.hpp"
#include "parsim/network.hpp"

namespace parsim::traffic {

using network::JunctionId;
using network::RoadId;

struct VehicleClass {
  std::string name;
  double max_speed = 0.0;  // m/s
  std::int64_t max_passengers = 1;
};

/// car, bus, mini_bus, coach, motorbike, bike.
std::vector<VehicleClass> default_vehicle_classes();

enum class SpawnMode { fixed, poisson };

struct TrafficConfig {
  std::int64_t max_minutes = 30;
  std::int64_t tick_seconds = 1;  // must divide 60
  std::int64_t summary_every_minutes = 10;
  std::int64_t spawn_per_minute = 10;
  SpawnMode spawn_mode = SpawnMode::fixed;
  double fuel_min = 600.0;  // seconds of running time
  double fuel_max = 3600.0;
  double crash_beta = 0.0005;  // per second per co-located vehicle
  network::CongestionModel congestion;
  std::uint64_t rng_seed = 1;
  std::vector<VehicleClass> classes = default_vehicle_classes();

  std::int64_t ticks_per_minute() const noexcept { return 60 / tick_seconds; }
  double dt() const noexcept { return static_cast<double>(tick_seconds); }

  /// Throws ValidationError.
  void validate() const;
};

/// Applies one key=value setting. Unknown keys throw ValidationError.
void apply_setting(TrafficConfig& cfg, std::string_view key, std::string_view value);
TrafficConfig parse_traffic_config(std::string_view text, TrafficConfig base = {});

// ---------------------------------------------------------------------------
// Statistics

struct GlobalCounters {
  std::int64_t vehicles_added = 0;
  std::int64_t passengers_created = 0;
  std::int64_t delivered_vehicles = 0;
  std::int64_t passengers_delivered = 0;
  std::int64_t passengers_stranded = 0;
  std::int64_t crashes = 0;
  std::int64_t fuel_exhausted = 0;
  std::int64_t replan_dead_ends = 0;
  std::int64_t spawn_failures = 0;

  friend bool operator==(const GlobalCounters&, const GlobalCounters&) = default;
};

struct JunctionCounters {
  std::int64_t crashes = 0;
  std::int64_t vehicles_passed = 0;
};

struct RoadCounters {
  std::int64_t occupancy = 0;
  std::int64_t vehicles_total = 0;
  std::int64_t max_concurrent = 0;
};

struct SimStats {
  std::int64_t sim_minutes = 0;
  GlobalCounters totals;
  std::vector<JunctionCounters> per_junction;  // by junction id
  std::vector<RoadCounters> per_road;          // by road id
};

/// `[minute=<m>] added=<n> delivered=<p> stranded=<q> crashes=<c> no_fuel=<f>` plus newline.
std::string emit_summary(const GlobalCounters& totals, std::int64_t minute);

std::string format_final_stats(const SimStats& stats, const network::RoadNetwork& net);
void write_final_stats(const SimStats& stats, const network::RoadNetwork& net,
                       const std::string& path);

// ---------------------------------------------------------------------------
// Vehicles

enum class VehiclePhase { at_junction, on_road };

struct VehicleState {
  actor::ActorId id;
  std::uint32_t class_index = 0;
  double class_max_speed = 0.0;
  std::int64_t passengers = 1;
  JunctionId source = 0;
  JunctionId destination = 0;
  double fuel_remaining = 0.0;
  network::Route route;

  VehiclePhase phase = VehiclePhase::at_junction;
  JunctionId junction = 0;  // valid while at_junction
  RoadId road = 0;          // valid while on_road
  double position = 0.0;    // metres from the road's start
  double speed = 0.0;       // locked at road entry

  actor::VehicleTicket ticket() const;
};

enum class AdvanceEvent { none, arrived, fuel_exhausted };

/// One tick of a live vehicle. Fuel drains by dt whether moving or waiting;
/// exhaustion is checked before movement. A vehicle on a road moves speed*dt
/// and is capped at the road's end, which reports an arrival.
AdvanceEvent advance_vehicle(VehicleState& v, const network::RoadNetwork& net, double dt);

// ---------------------------------------------------------------------------
// Junction logic

/// min(1, beta (k - 1) dt), and 0 for k <= 1.
double crash_probability(double beta, std::int64_t vehicles_at_junction, double dt);

/// Rolls each of k co-located vehicles independently. Returns crashed indices
/// in ascending order.
std::vector<std::size_t> crash_check(SplitMix64& rng, std::size_t k, double beta, double dt);

/// Round-robin light over a junction's outgoing roads in file order.
class TrafficLight {
 public:
  explicit TrafficLight(std::size_t road_count);

  std::size_t enabled_index() const noexcept { return enabled_; }
  bool enabled(std::size_t index) const noexcept { return index == enabled_; }
  std::size_t road_count() const noexcept { return count_; }
  std::uint64_t minute_of_last_change() const noexcept { return last_change_; }

  void rotate(std::uint64_t minute) noexcept;

 private:
  std::size_t count_;
  std::size_t enabled_ = 0;
  std::uint64_t last_change_ = 0;
};

struct WaitingVehicle {
  actor::VehicleTicket ticket;
  network::Route route;
  std::size_t out_index = 0;     // position of the chosen road in the outgoing list
  std::uint64_t since_tick = 0;  // tick at which the vehicle reached the junction
};

struct Admission {
  WaitingVehicle vehicle;
  RoadId road = 0;
  double speed = 0.0;
};

struct JunctionTickResult {
  std::vector<WaitingVehicle> out_of_fuel;
  std::vector<WaitingVehicle> crashed;
  std::vector<Admission> admitted;
};

enum class ArrivalOutcome { delivered, dead_end, queued };

class JunctionState {
 public:
  JunctionState(const network::RoadNetwork& net, JunctionId id, const TrafficConfig& cfg,
                std::uint64_t rng_seed);

  JunctionId id() const noexcept { return id_; }

  /// A vehicle reached this junction (or was created here). Delivers it,
  /// rejects it as a dead end, or plans its next road and queues it.
  ArrivalOutcome accept(const actor::VehicleTicket& ticket, std::uint64_t tick);

  /// Per-tick junction work, in order: mirror fuel drain of waiting vehicles
  /// and drop the exhausted ones, roll crashes (no lights only), admit onto roads.
  JunctionTickResult on_tick(std::uint64_t tick);

  void rotate_lights(std::uint64_t minute);

  /// A vehicle left one of this junction's outgoing roads.
  void release(RoadId road);

  const TrafficLight* light() const noexcept { return light_ ? &*light_ : nullptr; }
  const JunctionCounters& counters() const noexcept { return counters_; }
  const RoadCounters& road_counters(std::size_t out_index) const { return roads_.at(out_index); }
  const std::vector<RoadId>& outgoing() const noexcept { return outgoing_; }
  std::size_t waiting_count() const noexcept;
  std::size_t waiting_on(std::size_t out_index) const { return queues_.at(out_index).size(); }
  double current_speed(std::size_t out_index) const;

 private:
  std::size_t out_index_of(RoadId road) const;

  const network::RoadNetwork* net_;
  JunctionId id_;
  const TrafficConfig* cfg_;
  SplitMix64 rng_;
  std::vector<RoadId> outgoing_;
  std::vector<RoadCounters> roads_;
  std::vector<std::vector<WaitingVehicle>> queues_;  // FIFO per outgoing road
  std::optional<TrafficLight> light_;
  JunctionCounters counters_;
};

// ---------------------------------------------------------------------------
// Spawning

struct SpawnSpec {
  std::uint32_t class_index = 0;
  std::int64_t passengers = 1;
  double fuel = 0.0;
  JunctionId source = 0;
  JunctionId destination = 0;
};

struct SpawnWave {
  std::vector<SpawnSpec> vehicles;
  std::int64_t failures = 0;
};

/// Draws new vehicles from one seeded stream. Source/destination pairs are
/// rejection-sampled (up to 64 tries per vehicle) until distinct and connected.
class SpawnPlanner {
 public:
  static constexpr int kMaxAttempts = 64;

  SpawnPlanner(const network::RoadNetwork& net, const TrafficConfig& cfg, std::uint64_t seed);

  SpawnWave spawn_wave(std::uint64_t minute);

 private:
  std::int64_t wave_size();

  const network::RoadNetwork* net_;
  const TrafficConfig* cfg_;
  SplitMix64 rng_;
  network::ReachabilityCache reach_;
};

// ---------------------------------------------------------------------------
// Simulation

struct MinuteAudit {
  std::int64_t minute = 0;
  GlobalCounters totals;
  std::int64_t active_vehicles = 0;
  std::int64_t passengers_aboard = 0;
};

class TrafficSimulation;

struct SimOptions {
  actor::ExecutionMode mode = actor::ExecutionMode::deterministic;
  std::uint32_t shards = 1;
  bool record_trace = false;
  /// Receives each summary line as the director emits it.
  std::function<void(const std::string&)> on_summary;
  /// Called after every fully drained tick.
  std::function<void(std::uint64_t, const TrafficSimulation&)> on_tick_end;
};

struct TrafficResult {
  std::string summary_text;
  SimStats stats;
  std::vector<MinuteAudit> audits;  // one per minute boundary, minute 0 included
  actor::RunStats runtime;
  std::vector<actor::TraceEntry> trace;
};

class TrafficSimulation {
 public:
  TrafficSimulation(const network::RoadNetwork& net, TrafficConfig cfg, SimOptions opts = {});
  ~TrafficSimulation();
  TrafficSimulation(const TrafficSimulation&) = delete;
  TrafficSimulation& operator=(const TrafficSimulation&) = delete;

  TrafficResult run();

  /// Inspection; valid between ticks.
  const JunctionState& junction(JunctionId id) const;
  const GlobalCounters& totals() const;
  std::int64_t active_vehicles() const;
  std::int64_t passengers_aboard() const;

 private:
  MinuteAudit audit(std::int64_t minute) const;
  SimStats collect_stats() const;

  const network::RoadNetwork* net_;
  TrafficConfig cfg_;
  SimOptions opts_;
  std::unique_ptr<actor::Runtime> runtime_;
  actor::ActorId director_;
  std::vector<actor::ActorId> junctions_;
};

}  // namespace parsim::traffic
