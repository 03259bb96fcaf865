#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "parsim/errors.hpp"
#include "parsim/traffic.hpp"

namespace parsim::traffic {

std::vector<VehicleClass> default_vehicle_classes() {
  // Defaults; every class is overridable from the config file.
  return {
      {"car", 33.0, 5},     {"bus", 25.0, 80},      {"mini_bus", 30.0, 16},
      {"coach", 27.0, 50},  {"motorbike", 38.0, 2}, {"bike", 8.0, 1},
  };
}

void TrafficConfig::validate() const {
  if (max_minutes < 0) throw ValidationError("max_minutes must be >= 0");
  if (tick_seconds < 1 || 60 % tick_seconds != 0) {
    throw ValidationError("tick_seconds must be a positive divisor of 60");
  }
  if (summary_every_minutes < 1) throw ValidationError("summary_every_minutes must be >= 1");
  if (spawn_per_minute < 0) throw ValidationError("spawn_per_minute must be >= 0");
  if (!(fuel_min > 0.0) || !(fuel_max >= fuel_min)) {
    throw ValidationError("fuel range must satisfy 0 < min <= max");
  }
  if (!(crash_beta >= 0.0)) throw ValidationError("crash_beta must be >= 0");
  if (!(congestion.alpha >= 0.0)) throw ValidationError("congestion_alpha must be >= 0");
  if (!(congestion.speed_floor > 0.0)) throw ValidationError("speed_floor must be > 0");
  if (classes.size() != 6) throw ValidationError("exactly six vehicle classes are required");
  for (const auto& c : classes) {
    if (!(c.max_speed > 0.0) || c.max_passengers < 1) {
      throw ValidationError("vehicle class '" + c.name + "' needs positive speed and capacity");
    }
  }
}

void apply_setting(TrafficConfig& cfg, std::string_view key, std::string_view value) {
  const std::string k(key);
  if (k == "max_minutes") {
    cfg.max_minutes = parse_integer(value, k);
  } else if (k == "tick_seconds") {
    cfg.tick_seconds = parse_integer(value, k);
  } else if (k == "summary_every_minutes") {
    cfg.summary_every_minutes = parse_integer(value, k);
  } else if (k == "spawn_per_minute") {
    cfg.spawn_per_minute = parse_integer(value, k);
  } else if (k == "spawn_mode") {
    if (value == "fixed") {
      cfg.spawn_mode = SpawnMode::fixed;
    } else if (value == "poisson") {
      cfg.spawn_mode = SpawnMode::poisson;
    } else {
      throw ValidationError("spawn_mode must be fixed or poisson");
    }
  } else if (k == "fuel_range") {
    const auto comma = value.find(',');
    if (comma == std::string_view::npos) throw ValidationError("fuel_range expects min,max");
    cfg.fuel_min = parse_real(value.substr(0, comma), k);
    cfg.fuel_max = parse_real(value.substr(comma + 1), k);
  } else if (k == "fuel_min") {
    cfg.fuel_min = parse_real(value, k);
  } else if (k == "fuel_max") {
    cfg.fuel_max = parse_real(value, k);
  } else if (k == "crash_beta") {
    cfg.crash_beta = parse_real(value, k);
  } else if (k == "congestion_alpha" || k == "alpha") {
    cfg.congestion.alpha = parse_real(value, k);
  } else if (k == "speed_floor" || k == "v_floor") {
    cfg.congestion.speed_floor = parse_real(value, k);
  } else if (k == "rng_seed" || k == "seed") {
    cfg.rng_seed = static_cast<std::uint64_t>(parse_integer(value, k));
  } else if (k.rfind("class.", 0) == 0) {
    const auto dot = k.find('.', 6);
    if (dot == std::string::npos) throw ValidationError("expected class.<name>.<field>");
    const std::string name = k.substr(6, dot - 6);
    const std::string field = k.substr(dot + 1);
    auto it = std::find_if(cfg.classes.begin(), cfg.classes.end(),
                           [&](const VehicleClass& c) { return c.name == name; });
    if (it == cfg.classes.end()) throw ValidationError("unknown vehicle class '" + name + "'");
    if (field == "max_speed") {
      it->max_speed = parse_real(value, k);
    } else if (field == "max_passengers") {
      it->max_passengers = parse_integer(value, k);
    } else {
      throw ValidationError("unknown vehicle class field '" + field + "'");
    }
  } else {
    throw ValidationError("unknown traffic setting '" + k + "'");
  }
}

TrafficConfig parse_traffic_config(std::string_view text, TrafficConfig base) {
  for (const auto& e : parse_key_values(text)) {
    try {
      apply_setting(base, e.key, e.value);
    } catch (const ValidationError& err) {
      throw ValidationError("config line " + std::to_string(e.line) + ": " + err.what());
    }
  }
  base.validate();
  return base;
}

// ---------------------------------------------------------------------------

std::string emit_summary(const GlobalCounters& t, std::int64_t minute) {
  std::ostringstream out;
  out << "[minute=" << minute << "] added=" << t.vehicles_added
      << " delivered=" << t.passengers_delivered << " stranded=" << t.passengers_stranded
      << " crashes=" << t.crashes << " no_fuel=" << t.fuel_exhausted << '\n';
  return out.str();
}

std::string format_final_stats(const SimStats& stats, const network::RoadNetwork& net) {
  std::ostringstream out;
  out << "kind,id_a,id_b,metric1,metric2\n";
  for (std::size_t j = 0; j < stats.per_junction.size(); ++j) {
    const auto& c = stats.per_junction[j];
    out << "junction," << j << ",," << c.crashes << ',' << c.vehicles_passed << '\n';
  }
  for (std::size_t r = 0; r < stats.per_road.size(); ++r) {
    const auto& road = net.road(static_cast<RoadId>(r));
    const auto& c = stats.per_road[r];
    out << "road," << road.from << ',' << road.to << ',' << c.vehicles_total << ','
        << c.max_concurrent << '\n';
  }
  return out.str();
}

void write_final_stats(const SimStats& stats, const network::RoadNetwork& net,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << format_final_stats(stats, net);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------

actor::VehicleTicket VehicleState::ticket() const {
  return actor::VehicleTicket{id, class_index, class_max_speed, passengers, destination,
                              fuel_remaining};
}

AdvanceEvent advance_vehicle(VehicleState& v, const network::RoadNetwork& net, double dt) {
  v.fuel_remaining -= dt;
  if (v.fuel_remaining <= 0.0) return AdvanceEvent::fuel_exhausted;
  if (v.phase != VehiclePhase::on_road) return AdvanceEvent::none;

  const double length = net.road(v.road).length;
  v.position += v.speed * dt;
  if (v.position >= length) {
    v.position = length;
    return AdvanceEvent::arrived;
  }
  return AdvanceEvent::none;
}

double crash_probability(double beta, std::int64_t vehicles_at_junction, double dt) {
  if (vehicles_at_junction <= 1) return 0.0;
  return std::min(1.0, beta * static_cast<double>(vehicles_at_junction - 1) * dt);
}

std::vector<std::size_t> crash_check(SplitMix64& rng, std::size_t k, double beta, double dt) {
  std::vector<std::size_t> crashed;
  const double p = crash_probability(beta, static_cast<std::int64_t>(k), dt);
  if (p <= 0.0) return crashed;
  for (std::size_t i = 0; i < k; ++i) {
    if (rng.uniform01() < p) crashed.push_back(i);
  }
  return crashed;
}

TrafficLight::TrafficLight(std::size_t road_count) : count_(road_count) {
  if (road_count == 0) throw std::invalid_argument("a traffic light needs at least one road");
}

void TrafficLight::rotate(std::uint64_t minute) noexcept {
  enabled_ = (enabled_ + 1) % count_;
  last_change_ = minute;
}

// ---------------------------------------------------------------------------

JunctionState::JunctionState(const network::RoadNetwork& net, JunctionId id,
                             const TrafficConfig& cfg, std::uint64_t rng_seed)
    : net_(&net), id_(id), cfg_(&cfg), rng_(rng_seed), outgoing_(net.outgoing(id)) {
  roads_.resize(outgoing_.size());
  queues_.resize(outgoing_.size());
  if (net.junction(id).has_traffic_lights && !outgoing_.empty()) light_.emplace(outgoing_.size());
}

std::size_t JunctionState::out_index_of(RoadId road) const {
  const auto it = std::find(outgoing_.begin(), outgoing_.end(), road);
  if (it == outgoing_.end()) {
    throw std::logic_error("road " + std::to_string(road) + " does not leave junction " +
                           std::to_string(id_));
  }
  return static_cast<std::size_t>(it - outgoing_.begin());
}

std::size_t JunctionState::waiting_count() const noexcept {
  std::size_t n = 0;
  for (const auto& q : queues_) n += q.size();
  return n;
}

double JunctionState::current_speed(std::size_t out_index) const {
  const auto& road = net_->road(outgoing_.at(out_index));
  return cfg_->congestion.speed(road.max_speed, roads_.at(out_index).occupancy);
}

ArrivalOutcome JunctionState::accept(const actor::VehicleTicket& ticket, std::uint64_t tick) {
  if (ticket.destination == id_) {
    ++counters_.vehicles_passed;
    return ArrivalOutcome::delivered;
  }
  network::Route route;
  try {
    route = network::plan_route(*net_, id_, ticket.destination, [this](const network::Road& r) {
      return cfg_->congestion.speed(r.max_speed, roads_[out_index_of(r.id)].occupancy);
    });
  } catch (const network::NoRoute&) {
    return ArrivalOutcome::dead_end;
  }
  const std::size_t idx = out_index_of(route.roads.front());
  queues_[idx].push_back(WaitingVehicle{ticket, std::move(route), idx, tick});
  return ArrivalOutcome::queued;
}

JunctionTickResult JunctionState::on_tick(std::uint64_t tick) {
  JunctionTickResult result;
  const double dt = cfg_->dt();
  auto eligible = [tick](const WaitingVehicle& w) { return w.since_tick < tick; };

  // Mirrors the fuel subtraction each waiting vehicle performs on itself this tick.
  for (auto& q : queues_) {
    std::vector<WaitingVehicle> keep;
    keep.reserve(q.size());
    for (auto& w : q) {
      if (eligible(w)) {
        w.ticket.fuel_remaining -= dt;
        if (w.ticket.fuel_remaining <= 0.0) {
          result.out_of_fuel.push_back(std::move(w));
          continue;
        }
      }
      keep.push_back(std::move(w));
    }
    q = std::move(keep);
  }

  if (!light_) {
    std::vector<std::pair<std::size_t, std::size_t>> present;  // (queue, position)
    for (std::size_t qi = 0; qi < queues_.size(); ++qi) {
      for (std::size_t i = 0; i < queues_[qi].size(); ++i) {
        if (eligible(queues_[qi][i])) present.emplace_back(qi, i);
      }
    }
    const auto crashed = crash_check(rng_, present.size(), cfg_->crash_beta, dt);
    // Erase back to front.
    for (auto it = crashed.rbegin(); it != crashed.rend(); ++it) {
      const auto [qi, i] = present[*it];
      result.crashed.push_back(std::move(queues_[qi][i]));
      queues_[qi].erase(queues_[qi].begin() + static_cast<std::ptrdiff_t>(i));
    }
    std::reverse(result.crashed.begin(), result.crashed.end());
    counters_.crashes += static_cast<std::int64_t>(crashed.size());
  }

  auto admit = [&](WaitingVehicle&& w) {
    const std::size_t idx = w.out_index;
    RoadCounters& rc = roads_[idx];
    const RoadId road = outgoing_[idx];
    const double speed = std::min(w.ticket.class_max_speed, current_speed(idx));
    ++rc.occupancy;
    ++rc.vehicles_total;
    rc.max_concurrent = std::max(rc.max_concurrent, rc.occupancy);
    ++counters_.vehicles_passed;
    result.admitted.push_back(Admission{std::move(w), road, speed});
  };

  if (light_) {
    // One vehicle per tick onto the enabled road.
    auto& q = queues_[light_->enabled_index()];
    if (!q.empty() && eligible(q.front())) {
      admit(std::move(q.front()));
      q.erase(q.begin());
    }
  } else {
    for (auto& q : queues_) {
      std::vector<WaitingVehicle> keep;
      for (auto& w : q) {
        if (eligible(w)) {
          admit(std::move(w));
        } else {
          keep.push_back(std::move(w));
        }
      }
      q = std::move(keep);
    }
  }
  return result;
}

void JunctionState::rotate_lights(std::uint64_t minute) {
  if (light_) light_->rotate(minute);
}

void JunctionState::release(RoadId road) {
  RoadCounters& rc = roads_[out_index_of(road)];
  if (rc.occupancy <= 0) throw std::logic_error("road occupancy underflow");
  --rc.occupancy;
}

// ---------------------------------------------------------------------------

SpawnPlanner::SpawnPlanner(const network::RoadNetwork& net, const TrafficConfig& cfg,
                           std::uint64_t seed)
    : net_(&net), cfg_(&cfg), rng_(seed), reach_(net) {}

std::int64_t SpawnPlanner::wave_size() {
  if (cfg_->spawn_mode == SpawnMode::fixed) return cfg_->spawn_per_minute;
  // Poisson by multiplication, in chunks of at most 30.
  double lambda = static_cast<double>(cfg_->spawn_per_minute);
  std::int64_t total = 0;
  while (lambda > 0.0) {
    const double chunk = std::min(lambda, 30.0);
    lambda -= chunk;
    const double limit = std::exp(-chunk);
    double p = 1.0;
    std::int64_t k = -1;
    do {
      ++k;
      p *= rng_.uniform01();
    } while (p > limit);
    total += k;
  }
  return total;
}

SpawnWave SpawnPlanner::spawn_wave(std::uint64_t /*minute*/) {
  SpawnWave wave;
  const std::int64_t count = wave_size();
  const std::size_t n = net_->junction_count();
  for (std::int64_t i = 0; i < count; ++i) {
    std::optional<std::pair<JunctionId, JunctionId>> pair;
    if (n >= 2) {
      for (int attempt = 0; attempt < kMaxAttempts && !pair; ++attempt) {
        const auto s = static_cast<JunctionId>(rng_.below(n));
        const auto d = static_cast<JunctionId>(rng_.below(n));
        if (s != d && reach_.reachable(s, d)) pair.emplace(s, d);
      }
    }
    if (!pair) {
      ++wave.failures;
      continue;
    }
    SpawnSpec spec;
    spec.source = pair->first;
    spec.destination = pair->second;
    spec.class_index = static_cast<std::uint32_t>(rng_.below(cfg_->classes.size()));
    spec.passengers = rng_.between(std::int64_t{1}, cfg_->classes[spec.class_index].max_passengers);
    spec.fuel = cfg_->fuel_min == cfg_->fuel_max ? cfg_->fuel_min
                                                 : rng_.between(cfg_->fuel_min, cfg_->fuel_max);
    wave.vehicles.push_back(spec);
  }
  return wave;
}

}  // namespace parsim::traffic
