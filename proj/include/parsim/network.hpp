#pragma once

// Road network: junctions joined by one-way roads, parsed from a line-oriented
// text file, plus congestion-dependent speed and travel-time route planning.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace parsim::network {

using JunctionId = std::uint32_t;
using RoadId = std::uint32_t;

struct Junction {
  JunctionId id = 0;
  bool has_traffic_lights = false;
  std::vector<RoadId> outgoing;  // file order; drives light rotation
};

struct Road {
  RoadId id = 0;
  JunctionId from = 0;
  JunctionId to = 0;
  double length = 0.0;     // metres
  double max_speed = 0.0;  // metres per second
  std::int64_t vehicle_count = 0;
};

/// Junction ids are dense: a file declaring N junctions uses ids 0..N-1 in any
/// order. Road ids are assigned 0..M-1 in file order.
class RoadNetwork {
 public:
  RoadNetwork() = default;
  RoadNetwork(std::vector<Junction> junctions, std::vector<Road> roads);

  std::size_t junction_count() const noexcept { return junctions_.size(); }
  std::size_t road_count() const noexcept { return roads_.size(); }

  const Junction& junction(JunctionId id) const;
  const Road& road(RoadId id) const;
  Road& road(RoadId id);

  const std::vector<Junction>& junctions() const noexcept { return junctions_; }
  const std::vector<Road>& roads() const noexcept { return roads_; }
  const std::vector<RoadId>& outgoing(JunctionId id) const { return junction(id).outgoing; }

  bool contains(JunctionId id) const noexcept { return id < junctions_.size(); }

  friend bool operator==(const RoadNetwork&, const RoadNetwork&);

 private:
  std::vector<Junction> junctions_;  // indexed by id
  std::vector<Road> roads_;          // indexed by id
};

/// Topology equality ignores occupancy.
bool operator==(const RoadNetwork& a, const RoadNetwork& b);

class UnknownJunction : public std::out_of_range {
 public:
  explicit UnknownJunction(JunctionId id)
      : std::out_of_range("unknown junction id " + std::to_string(id)) {}
};

class NoRoute : public std::runtime_error {
 public:
  NoRoute(JunctionId from, JunctionId to)
      : std::runtime_error("no route from junction " + std::to_string(from) + " to " +
                           std::to_string(to)) {}
};

RoadNetwork parse_network(std::string_view text);
RoadNetwork load_network(const std::string& path);
std::string serialize_network(const RoadNetwork& net);

/// v(n) = max(v_floor, v_max / (1 + alpha n)).
struct CongestionModel {
  double alpha = 0.1;
  double speed_floor = 1.0;

  double speed(double max_speed, std::int64_t vehicle_count) const noexcept;
};

double current_speed(const Road& road, const CongestionModel& model = {});

bool reachable(const RoadNetwork& net, JunctionId from, JunctionId to);

/// Memoizes one directed search per source junction.
class ReachabilityCache {
 public:
  explicit ReachabilityCache(const RoadNetwork& net) : net_(&net) {}
  bool reachable(JunctionId from, JunctionId to);

 private:
  const RoadNetwork* net_;
  std::vector<std::vector<bool>> by_source_;
};

struct Route {
  std::vector<JunctionId> junctions;
  std::vector<RoadId> roads;
  double predicted_time = 0.0;  // seconds
};

/// Speed used for a road leaving the start junction.
using FirstHopSpeed = std::function<double(const Road&)>;

/// Minimum predicted travel time route. Roads leaving `start` are weighted by
/// `first_hop`, every other road by its maximum speed. Ties go to fewer roads,
/// then to the lexicographically smaller junction sequence.
Route plan_route(const RoadNetwork& net, JunctionId start, JunctionId dest,
                 const FirstHopSpeed& first_hop);

/// As above, with first-hop speed = current_speed(road) from the road's own count.
Route plan_route(const RoadNetwork& net, JunctionId start, JunctionId dest,
                 const CongestionModel& model = {});

/// Deterministic synthetic network: a directed ring through all junctions
/// (so every pair is mutually reachable) plus random extra roads.
struct GeneratorOptions {
  std::size_t junctions = 20;
  std::size_t roads = 40;
  double lights_fraction = 0.5;
  double min_length = 100.0;
  double max_length = 1000.0;
  std::uint64_t seed = 1;
};
RoadNetwork generate_network(const GeneratorOptions& opts);

}  // namespace parsim::network
