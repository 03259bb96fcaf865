#include "parsim/network.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "parsim/errors.hpp"
#include "parsim/hash.hpp"

namespace parsim::network {

RoadNetwork::RoadNetwork(std::vector<Junction> junctions, std::vector<Road> roads)
    : junctions_(std::move(junctions)), roads_(std::move(roads)) {
  for (std::size_t i = 0; i < junctions_.size(); ++i) {
    if (junctions_[i].id != i) {
      throw ValidationError("junction at index " + std::to_string(i) + " has id " +
                            std::to_string(junctions_[i].id));
    }
    junctions_[i].outgoing.clear();
  }
  for (std::size_t r = 0; r < roads_.size(); ++r) {
    Road& road = roads_[r];
    road.id = static_cast<RoadId>(r);
    if (!contains(road.from) || !contains(road.to)) {
      throw ValidationError("road " + std::to_string(r) + " (" + std::to_string(road.from) +
                            " -> " + std::to_string(road.to) + ") references an undeclared junction");
    }
    if (!(road.length > 0.0) || !std::isfinite(road.length)) {
      throw ValidationError("road " + std::to_string(r) + " has non-positive length");
    }
    if (!(road.max_speed > 0.0) || !std::isfinite(road.max_speed)) {
      throw ValidationError("road " + std::to_string(r) + " has non-positive max speed");
    }
    junctions_[road.from].outgoing.push_back(road.id);
  }
}

const Junction& RoadNetwork::junction(JunctionId id) const {
  if (!contains(id)) throw UnknownJunction(id);
  return junctions_[id];
}

const Road& RoadNetwork::road(RoadId id) const {
  if (id >= roads_.size()) throw std::out_of_range("unknown road id " + std::to_string(id));
  return roads_[id];
}

Road& RoadNetwork::road(RoadId id) {
  if (id >= roads_.size()) throw std::out_of_range("unknown road id " + std::to_string(id));
  return roads_[id];
}

bool operator==(const RoadNetwork& a, const RoadNetwork& b) {
  if (a.junctions_.size() != b.junctions_.size() || a.roads_.size() != b.roads_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.junctions_.size(); ++i) {
    const auto& x = a.junctions_[i];
    const auto& y = b.junctions_[i];
    if (x.id != y.id || x.has_traffic_lights != y.has_traffic_lights || x.outgoing != y.outgoing) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.roads_.size(); ++i) {
    const auto& x = a.roads_[i];
    const auto& y = b.roads_[i];
    if (x.id != y.id || x.from != y.from || x.to != y.to || x.length != y.length ||
        x.max_speed != y.max_speed) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string_view> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    Line out{number, {}};
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) out.tokens.push_back(line.substr(start, i - start));
    }
    if (!out.tokens.empty()) lines.push_back(std::move(out));
  }
  return lines;
}

template <typename T>
T parse_number(const Line& line, std::string_view token, const char* what) {
  T value{};
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(line.number, std::string("expected ") + what + ", got '" +
                                      std::string(token) + "'");
  }
  return value;
}

std::size_t parse_header(const std::vector<Line>& lines, std::size_t at, std::string_view keyword,
                         std::size_t last_line) {
  if (at >= lines.size()) {
    throw ParseError(last_line + 1, "missing '" + std::string(keyword) + " <count>' header");
  }
  const Line& line = lines[at];
  if (line.tokens.size() != 2 || line.tokens[0] != keyword) {
    throw ParseError(line.number, "expected '" + std::string(keyword) + " <count>'");
  }
  return parse_number<std::size_t>(line, line.tokens[1], "a count");
}

}  // namespace

RoadNetwork parse_network(std::string_view text) {
  const std::vector<Line> lines = tokenize(text);
  std::size_t at = 0;
  const std::size_t last_line = lines.empty() ? 0 : lines.back().number;

  const std::size_t n = parse_header(lines, at++, "junctions", last_line);
  std::vector<Junction> junctions(n);
  std::vector<bool> seen(n, false);
  for (std::size_t k = 0; k < n; ++k, ++at) {
    if (at >= lines.size()) throw ParseError(last_line + 1, "expected junction line");
    const Line& line = lines[at];
    if (line.tokens.size() != 2) throw ParseError(line.number, "expected '<id> <lights:0|1>'");
    const auto id = parse_number<std::uint64_t>(line, line.tokens[0], "a junction id");
    const auto lights = parse_number<int>(line, line.tokens[1], "a lights flag");
    if (lights != 0 && lights != 1) throw ParseError(line.number, "lights flag must be 0 or 1");
    if (id >= n) {
      throw ValidationError("junction id " + std::to_string(id) + " on line " +
                            std::to_string(line.number) + " is outside [0, " +
                            std::to_string(n) + ")");
    }
    if (seen[id]) {
      throw ValidationError("duplicate junction id " + std::to_string(id) + " on line " +
                            std::to_string(line.number));
    }
    seen[id] = true;
    junctions[id] = Junction{static_cast<JunctionId>(id), lights == 1, {}};
  }

  const std::size_t m = parse_header(lines, at++, "roads", last_line);
  std::vector<Road> roads;
  roads.reserve(m);
  for (std::size_t k = 0; k < m; ++k, ++at) {
    if (at >= lines.size()) throw ParseError(last_line + 1, "expected road line");
    const Line& line = lines[at];
    if (line.tokens.size() != 4) {
      throw ParseError(line.number, "expected '<from> <to> <length_m> <max_speed_ms>'");
    }
    Road road;
    const auto from = parse_number<std::uint64_t>(line, line.tokens[0], "a junction id");
    const auto to = parse_number<std::uint64_t>(line, line.tokens[1], "a junction id");
    road.length = parse_number<double>(line, line.tokens[2], "a length");
    road.max_speed = parse_number<double>(line, line.tokens[3], "a speed");
    if (from >= n || to >= n) {
      throw ValidationError("road " + std::to_string(k) + " on line " +
                            std::to_string(line.number) + " references undeclared junction " +
                            std::to_string(from >= n ? from : to));
    }
    road.from = static_cast<JunctionId>(from);
    road.to = static_cast<JunctionId>(to);
    if (!(road.length > 0.0)) {
      throw ValidationError("road " + std::to_string(k) + " on line " +
                            std::to_string(line.number) + " has non-positive length");
    }
    if (!(road.max_speed > 0.0)) {
      throw ValidationError("road " + std::to_string(k) + " on line " +
                            std::to_string(line.number) + " has non-positive max speed");
    }
    roads.push_back(road);
  }
  if (at < lines.size()) throw ParseError(lines[at].number, "unexpected trailing content");

  return RoadNetwork(std::move(junctions), std::move(roads));
}

RoadNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

std::string serialize_network(const RoadNetwork& net) {
  std::ostringstream out;
  out.precision(17);
  out << "junctions " << net.junction_count() << '\n';
  for (const auto& j : net.junctions()) out << j.id << ' ' << (j.has_traffic_lights ? 1 : 0) << '\n';
  out << "roads " << net.road_count() << '\n';
  for (const auto& r : net.roads()) {
    out << r.from << ' ' << r.to << ' ' << r.length << ' ' << r.max_speed << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Speed and reachability

double CongestionModel::speed(double max_speed, std::int64_t vehicle_count) const noexcept {
  // Never exceeds the road limit, even when the limit is below the floor.
  const double v = max_speed / (1.0 + alpha * static_cast<double>(vehicle_count));
  return std::min(max_speed, std::max(speed_floor, v));
}

double current_speed(const Road& road, const CongestionModel& model) {
  return model.speed(road.max_speed, road.vehicle_count);
}

namespace {

std::vector<bool> search_from(const RoadNetwork& net, JunctionId from) {
  std::vector<bool> seen(net.junction_count(), false);
  std::deque<JunctionId> frontier{from};
  seen[from] = true;
  while (!frontier.empty()) {
    const JunctionId j = frontier.front();
    frontier.pop_front();
    for (RoadId r : net.outgoing(j)) {
      const JunctionId next = net.road(r).to;
      if (!seen[next]) {
        seen[next] = true;
        frontier.push_back(next);
      }
    }
  }
  return seen;
}

}  // namespace

bool reachable(const RoadNetwork& net, JunctionId from, JunctionId to) {
  if (!net.contains(from)) throw UnknownJunction(from);
  if (!net.contains(to)) throw UnknownJunction(to);
  if (from == to) return true;
  return search_from(net, from)[to];
}

bool ReachabilityCache::reachable(JunctionId from, JunctionId to) {
  if (!net_->contains(from)) throw UnknownJunction(from);
  if (!net_->contains(to)) throw UnknownJunction(to);
  if (from == to) return true;
  if (by_source_.empty()) by_source_.resize(net_->junction_count());
  auto& row = by_source_[from];
  if (row.empty()) row = search_from(*net_, from);
  return row[to];
}

// ---------------------------------------------------------------------------
// Route planning

namespace {

constexpr JunctionId kNone = std::numeric_limits<JunctionId>::max();

struct Label {
  double time = std::numeric_limits<double>::infinity();
  std::size_t hops = 0;
  JunctionId parent = kNone;
  RoadId via = 0;
};

std::vector<JunctionId> path_to(const std::vector<Label>& labels, JunctionId v) {
  std::vector<JunctionId> path;
  for (JunctionId at = v; at != kNone; at = labels[at].parent) path.push_back(at);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

Route plan_route(const RoadNetwork& net, JunctionId start, JunctionId dest,
                 const FirstHopSpeed& first_hop) {
  if (!net.contains(start)) throw UnknownJunction(start);
  if (!net.contains(dest)) throw UnknownJunction(dest);

  std::vector<Label> labels(net.junction_count());
  labels[start].time = 0.0;

  using Entry = std::tuple<double, std::size_t, JunctionId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  queue.emplace(0.0, 0, start);

  while (!queue.empty()) {
    const auto [time, hops, u] = queue.top();
    queue.pop();
    if (time != labels[u].time || hops != labels[u].hops) continue;  // stale

    for (RoadId r : net.outgoing(u)) {
      const Road& road = net.road(r);
      const double speed = u == start ? first_hop(road) : road.max_speed;
      const double t = time + road.length / speed;
      const std::size_t h = hops + 1;
      const JunctionId v = road.to;
      if (v == start) continue;
      Label& cur = labels[v];

      bool better = t < cur.time || (t == cur.time && h < cur.hops);
      if (!better && t == cur.time && h == cur.hops && cur.parent != u) {
        auto candidate = path_to(labels, u);
        candidate.push_back(v);
        better = candidate < path_to(labels, v);
      }
      if (better) {
        cur = Label{t, h, u, r};
        queue.emplace(t, h, v);
      }
    }
  }

  if (start != dest && labels[dest].parent == kNone) throw NoRoute(start, dest);

  Route route;
  route.predicted_time = labels[dest].time;
  route.junctions = path_to(labels, dest);
  for (std::size_t i = 1; i < route.junctions.size(); ++i) {
    route.roads.push_back(labels[route.junctions[i]].via);
  }
  return route;
}

Route plan_route(const RoadNetwork& net, JunctionId start, JunctionId dest,
                 const CongestionModel& model) {
  return plan_route(net, start, dest,
                    [&model](const Road& road) { return current_speed(road, model); });
}

// ---------------------------------------------------------------------------
// Generator

RoadNetwork generate_network(const GeneratorOptions& opts) {
  if (opts.junctions == 0) throw ValidationError("generated network needs at least one junction");
  static constexpr double kSpeeds[] = {8.9, 13.4, 17.9, 22.4, 31.3};

  SplitMix64 rng(derive_seed(opts.seed, fnv1a64_u64(opts.junctions, fnv1a64_u64(opts.roads))));
  const std::size_t n = opts.junctions;

  std::vector<Junction> junctions(n);
  for (std::size_t i = 0; i < n; ++i) {
    junctions[i].id = static_cast<JunctionId>(i);
    junctions[i].has_traffic_lights = rng.uniform01() < opts.lights_fraction;
  }

  auto make_road = [&](std::size_t from, std::size_t to) {
    Road r;
    r.from = static_cast<JunctionId>(from);
    r.to = static_cast<JunctionId>(to);
    r.length = std::round(rng.between(opts.min_length, opts.max_length));
    r.max_speed = kSpeeds[rng.below(std::size(kSpeeds))];
    return r;
  };

  std::vector<Road> roads;
  std::set<std::pair<std::size_t, std::size_t>> used;
  if (n > 1) {
    for (std::size_t i = 0; i < n && roads.size() < opts.roads; ++i) {
      roads.push_back(make_road(i, (i + 1) % n));
      used.emplace(i, (i + 1) % n);
    }
    const std::size_t max_pairs = n * (n - 1);
    std::size_t attempts = 0;
    while (roads.size() < opts.roads && used.size() < max_pairs && attempts < 64 * opts.roads) {
      ++attempts;
      const std::size_t a = rng.below(n);
      const std::size_t b = rng.below(n);
      if (a == b || !used.emplace(a, b).second) continue;
      roads.push_back(make_road(a, b));
    }
  }
  return RoadNetwork(std::move(junctions), std::move(roads));
}

}  // namespace parsim::network
