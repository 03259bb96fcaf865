#include <type_traits>

#include "parsim/traffic.hpp"
#include "traffic_actors.hpp"

namespace parsim::traffic {

namespace detail {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// --- director ---------------------------------------------------------------

DirectorActor::DirectorActor(const network::RoadNetwork& net, const TrafficConfig& cfg,
                             std::uint64_t seed, std::function<void(const std::string&)> on_summary)
    : net_(&net), cfg_(&cfg), planner_(net, cfg, seed), on_summary_(std::move(on_summary)) {
  for (const auto& j : net.junctions()) {
    if (j.has_traffic_lights && !j.outgoing.empty()) lighted_.push_back(junction_actor(j.id));
  }
}

void DirectorActor::summary(std::int64_t minute) {
  const std::string line = emit_summary(totals_, minute);
  text_ += line;
  if (on_summary_) on_summary_(line);
}

void DirectorActor::spawn(std::uint64_t minute, actor::Context& ctx) {
  SpawnWave wave = planner_.spawn_wave(minute);
  totals_.spawn_failures += wave.failures;
  for (const SpawnSpec& spec : wave.vehicles) {
    VehicleState v;
    v.class_index = spec.class_index;
    v.class_max_speed = cfg_->classes[spec.class_index].max_speed;
    v.passengers = spec.passengers;
    v.source = spec.source;
    v.destination = spec.destination;
    v.fuel_remaining = spec.fuel;
    v.phase = VehiclePhase::at_junction;
    v.junction = spec.source;

    auto vehicle = std::make_unique<VehicleActor>(*net_, *cfg_, v);
    VehicleActor* raw = vehicle.get();
    const actor::ActorId id = ctx.spawn(actor::ActorKind::vehicle, std::move(vehicle));
    raw->state().id = id;

    ctx.send(junction_actor(spec.source), actor::SpawnVehicle{raw->state().ticket(), spec.source});
    live_.insert(id);
    ++totals_.vehicles_added;
    totals_.passengers_created += spec.passengers;
  }
}

void DirectorActor::on_tick(actor::Context& ctx) {
  const std::uint64_t tick = ctx.tick();
  const auto per_minute = static_cast<std::uint64_t>(cfg_->ticks_per_minute());
  const bool minute_boundary = tick % per_minute == 0;
  const auto minute = static_cast<std::int64_t>(tick / per_minute);

  if (minute_boundary) {
    if (minute >= cfg_->max_minutes) {
      summary(minute);
      ctx.send(ctx.self(), actor::Shutdown{});
      return;
    }
    if (minute % cfg_->summary_every_minutes == 0) summary(minute);
    if (minute > 0) {
      for (const auto& j : lighted_) {
        ctx.send(j, actor::MinuteElapsed{static_cast<std::uint64_t>(minute)});
      }
    }
  }

  for (std::size_t j = 0; j < net_->junction_count(); ++j) {
    ctx.send(junction_actor(static_cast<JunctionId>(j)), actor::Tick{});
  }
  for (const auto& v : live_) ctx.send(v, actor::Tick{});

  // New vehicles start draining fuel on the next tick.
  if (minute_boundary) spawn(static_cast<std::uint64_t>(minute), ctx);

  ctx.send_at(ctx.self(), actor::Tick{}, tick + 1);
}

void DirectorActor::receive(const actor::Message& msg, actor::Context& ctx) {
  std::visit(Overloaded{
                 [&](const actor::Tick&) { on_tick(ctx); },
                 [&](const actor::StatsReport& r) {
                   totals_.delivered_vehicles += r.delta.delivered_vehicles;
                   totals_.passengers_delivered += r.delta.passengers_delivered;
                   totals_.replan_dead_ends += r.delta.replan_dead_ends;
                   totals_.passengers_stranded += r.delta.passengers_stranded;
                   if (r.removed_vehicle) live_.erase(*r.removed_vehicle);
                 },
                 [&](const actor::Crash& c) {
                   ++totals_.crashes;
                   totals_.passengers_stranded += c.passengers;
                   live_.erase(c.vehicle);
                 },
                 [&](const actor::FuelExhausted& f) {
                   ++totals_.fuel_exhausted;
                   totals_.passengers_stranded += f.passengers;
                   live_.erase(f.vehicle);
                 },
                 [&](const auto&) {},
             },
             msg.payload);
}

// --- junction ---------------------------------------------------------------

void JunctionActor::on_arrival(const actor::VehicleTicket& ticket, actor::Context& ctx) {
  switch (state_.accept(ticket, ctx.tick())) {
    case ArrivalOutcome::delivered: {
      actor::StatsDelta d;
      d.delivered_vehicles = 1;
      d.passengers_delivered = ticket.passengers;
      ctx.send(kDirector, actor::StatsReport{d, ticket.vehicle});
      ctx.send(ticket.vehicle, actor::GrantEntry{actor::Disposition::delivered, 0, 0.0, {}});
      break;
    }
    case ArrivalOutcome::dead_end: {
      actor::StatsDelta d;
      d.replan_dead_ends = 1;
      d.passengers_stranded = ticket.passengers;
      ctx.send(kDirector, actor::StatsReport{d, ticket.vehicle});
      ctx.send(ticket.vehicle, actor::GrantEntry{actor::Disposition::dead_end, 0, 0.0, {}});
      break;
    }
    case ArrivalOutcome::queued:
      break;
  }
}

void JunctionActor::receive(const actor::Message& msg, actor::Context& ctx) {
  std::visit(Overloaded{
                 [&](const actor::Tick&) {
                   JunctionTickResult r = state_.on_tick(ctx.tick());
                   for (const auto& w : r.crashed) {
                     const actor::Crash crash{w.ticket.vehicle, state_.id(), w.ticket.passengers};
                     ctx.send(w.ticket.vehicle, crash);
                     ctx.send(kDirector, crash);
                   }
                   for (auto& a : r.admitted) {
                     ctx.send(a.vehicle.ticket.vehicle,
                              actor::GrantEntry{actor::Disposition::enter_road, a.road, a.speed,
                                                std::move(a.vehicle.route)});
                   }
                 },
                 [&](const actor::MinuteElapsed& m) { state_.rotate_lights(m.minute); },
                 [&](const actor::RequestEntry& r) { on_arrival(r.ticket, ctx); },
                 [&](const actor::SpawnVehicle& s) { on_arrival(s.ticket, ctx); },
                 [&](const actor::VehicleArrived& a) { state_.release(a.road); },
                 [&](const actor::FuelExhausted& f) {
                   if (f.road) state_.release(*f.road);
                 },
                 [&](const auto&) {},
             },
             msg.payload);
}

// --- vehicle ----------------------------------------------------------------

void VehicleActor::on_tick(actor::Context& ctx) {
  const bool on_road = state_.phase == VehiclePhase::on_road;
  switch (advance_vehicle(state_, *net_, cfg_->dt())) {
    case AdvanceEvent::none:
      break;
    case AdvanceEvent::fuel_exhausted: {
      actor::FuelExhausted f{state_.id, state_.passengers, std::nullopt};
      if (on_road) {
        f.road = state_.road;
        ctx.send(junction_actor(net_->road(state_.road).from), f);
      }
      ctx.send(kDirector, f);
      ctx.stop();
      break;
    }
    case AdvanceEvent::arrived: {
      const network::Road& road = net_->road(state_.road);
      ctx.send(junction_actor(road.from), actor::VehicleArrived{state_.id, road.id});
      state_.phase = VehiclePhase::at_junction;
      state_.junction = road.to;
      ctx.send(junction_actor(road.to), actor::RequestEntry{state_.ticket(), road.id});
      break;
    }
  }
}

void VehicleActor::receive(const actor::Message& msg, actor::Context& ctx) {
  std::visit(Overloaded{
                 [&](const actor::Tick&) { on_tick(ctx); },
                 [&](const actor::GrantEntry& g) {
                   if (g.disposition != actor::Disposition::enter_road) {
                     ctx.stop();
                     return;
                   }
                   state_.phase = VehiclePhase::on_road;
                   state_.road = g.road;
                   state_.position = 0.0;
                   state_.speed = g.speed;
                   state_.route = g.route;
                 },
                 [&](const actor::Crash&) { ctx.stop(); },
                 [&](const auto&) {},
             },
             msg.payload);
}

}  // namespace detail

// --- simulation ---------------------------------------------------------------

TrafficSimulation::TrafficSimulation(const network::RoadNetwork& net, TrafficConfig cfg,
                                     SimOptions opts)
    : net_(&net), cfg_(std::move(cfg)), opts_(std::move(opts)) {
  cfg_.validate();
}

TrafficSimulation::~TrafficSimulation() = default;

const JunctionState& TrafficSimulation::junction(JunctionId id) const {
  const auto* a = runtime_->find(detail::junction_actor(id));
  if (a == nullptr) throw network::UnknownJunction(id);
  return static_cast<const detail::JunctionActor*>(a)->state();
}

const GlobalCounters& TrafficSimulation::totals() const {
  return static_cast<const detail::DirectorActor*>(runtime_->find(director_))->totals();
}

std::int64_t TrafficSimulation::active_vehicles() const {
  return static_cast<std::int64_t>(runtime_->live_count(actor::ActorKind::vehicle));
}

std::int64_t TrafficSimulation::passengers_aboard() const {
  std::int64_t total = 0;
  runtime_->for_each_live(actor::ActorKind::vehicle, [&](actor::ActorId, actor::Actor& a) {
    total += static_cast<const detail::VehicleActor&>(a).state().passengers;
  });
  return total;
}

MinuteAudit TrafficSimulation::audit(std::int64_t minute) const {
  return MinuteAudit{minute, totals(), active_vehicles(), passengers_aboard()};
}

SimStats TrafficSimulation::collect_stats() const {
  SimStats s;
  s.sim_minutes = cfg_.max_minutes;
  s.totals = totals();
  s.per_junction.resize(net_->junction_count());
  s.per_road.resize(net_->road_count());
  for (std::size_t j = 0; j < net_->junction_count(); ++j) {
    const JunctionState& st = junction(static_cast<JunctionId>(j));
    s.per_junction[j] = st.counters();
    for (std::size_t i = 0; i < st.outgoing().size(); ++i) {
      s.per_road[st.outgoing()[i]] = st.road_counters(i);
    }
  }
  return s;
}

TrafficResult TrafficSimulation::run() {
  runtime_ = std::make_unique<actor::Runtime>(
      actor::RuntimeOptions{opts_.shards, opts_.mode, opts_.record_trace});

  director_ = detail::kDirector;
  runtime_->spawn(actor::ActorKind::director,
                  std::make_unique<detail::DirectorActor>(
                      *net_, cfg_, derive_seed(cfg_.rng_seed, actor::actor_hash(director_)),
                      opts_.on_summary));
  for (std::size_t j = 0; j < net_->junction_count(); ++j) {
    const auto id = detail::junction_actor(static_cast<JunctionId>(j));
    runtime_->spawn(actor::ActorKind::junction,
                    std::make_unique<detail::JunctionActor>(
                        *net_, static_cast<JunctionId>(j), cfg_,
                        derive_seed(cfg_.rng_seed, actor::actor_hash(id))));
  }

  TrafficResult result;
  result.audits.push_back(audit(0));

  const auto per_minute = static_cast<std::uint64_t>(cfg_.ticks_per_minute());
  runtime_->set_tick_hook([&](std::uint64_t tick) {
    if ((tick + 1) % per_minute == 0) {
      result.audits.push_back(audit(static_cast<std::int64_t>((tick + 1) / per_minute)));
    }
    if (opts_.on_tick_end) opts_.on_tick_end(tick, *this);
  });

  runtime_->post(director_, actor::Tick{}, 0);
  result.runtime = runtime_->run();

  result.summary_text =
      static_cast<const detail::DirectorActor*>(runtime_->find(director_))->summary_text();
  result.stats = collect_stats();
  result.trace = runtime_->trace();
  return result;
}

}  // namespace parsim::traffic
