#pragma once

// Actor wrappers around the traffic entity logic. Internal to the library.

#include <functional>
#include <set>
#include <string>

#include "parsim/actor.hpp"
#include "parsim/traffic.hpp"

namespace parsim::traffic::detail {

inline actor::ActorId junction_actor(JunctionId j) { return {actor::ActorKind::junction, j}; }
inline constexpr actor::ActorId kDirector{actor::ActorKind::director, 0};

/// Owns the clock: emits Tick every tick and MinuteElapsed on each new minute,
/// spawns vehicles, keeps the global counters and prints summaries.
class DirectorActor final : public actor::Actor {
 public:
  DirectorActor(const network::RoadNetwork& net, const TrafficConfig& cfg, std::uint64_t seed,
                std::function<void(const std::string&)> on_summary);

  void receive(const actor::Message& msg, actor::Context& ctx) override;

  const GlobalCounters& totals() const noexcept { return totals_; }
  const std::string& summary_text() const noexcept { return text_; }
  std::size_t live_vehicles() const noexcept { return live_.size(); }

 private:
  void on_tick(actor::Context& ctx);
  void summary(std::int64_t minute);
  void spawn(std::uint64_t minute, actor::Context& ctx);

  const network::RoadNetwork* net_;
  const TrafficConfig* cfg_;
  SpawnPlanner planner_;
  GlobalCounters totals_;
  std::set<actor::ActorId> live_;
  std::vector<actor::ActorId> lighted_;
  std::string text_;
  std::function<void(const std::string&)> on_summary_;
};

class JunctionActor final : public actor::Actor {
 public:
  JunctionActor(const network::RoadNetwork& net, JunctionId id, const TrafficConfig& cfg,
                std::uint64_t seed)
      : state_(net, id, cfg, seed) {}

  void receive(const actor::Message& msg, actor::Context& ctx) override;

  const JunctionState& state() const noexcept { return state_; }

 private:
  void on_arrival(const actor::VehicleTicket& ticket, actor::Context& ctx);

  JunctionState state_;
};

class VehicleActor final : public actor::Actor {
 public:
  VehicleActor(const network::RoadNetwork& net, const TrafficConfig& cfg, VehicleState state)
      : net_(&net), cfg_(&cfg), state_(std::move(state)) {}

  void receive(const actor::Message& msg, actor::Context& ctx) override;

  const VehicleState& state() const noexcept { return state_; }
  VehicleState& state() noexcept { return state_; }

 private:
  void on_tick(actor::Context& ctx);

  const network::RoadNetwork* net_;
  const TrafficConfig* cfg_;
  VehicleState state_;
};

}  // namespace parsim::traffic::detail
