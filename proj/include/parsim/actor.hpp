#pragma once

// Minimal actor runtime.
//
// Actors are addressed by ActorId and placed on shards by a stable FNV-1a hash.
// Every message carries a delivery tick. The runtime advances through ticks;
// within a tick it runs rounds: all messages due in the round are ordered by
// (tick, recipient, sender, send_seq) and delivered, and anything sent while
// processing is delivered in the next round (same tick) or at its scheduled
// later tick. A tick ends when no message for it remains.
//
// Deterministic mode runs each round on the calling thread in that total order.
// Parallel mode runs one OpenMP worker per shard; each shard sees its recipients'
// messages in the same order, so both modes produce identical actor behaviour.
// Actor serials are allocated from one counter per kind; spawning a given kind
// from more than one shard in parallel mode makes serial assignment racy.

#include <array>
#include <atomic>
#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "parsim/network.hpp"

namespace parsim::actor {

enum class ActorKind : std::uint8_t { director = 0, junction = 1, road = 2, vehicle = 3 };
inline constexpr std::size_t kActorKindCount = 4;

std::string_view to_string(ActorKind kind);

struct ActorId {
  ActorKind kind = ActorKind::director;
  std::uint64_t serial = 0;

  friend auto operator<=>(const ActorId&, const ActorId&) = default;

  /// Sender id used for messages injected by the controlling thread.
  static constexpr ActorId external() { return {ActorKind::director, ~0ULL}; }
};

std::string to_string(const ActorId& id);

/// Hash input is the kind byte followed by the serial as 8 little-endian bytes.
std::uint64_t actor_hash(const ActorId& id) noexcept;
std::uint32_t shard_of(const ActorId& id, std::uint32_t shard_count);

// ---------------------------------------------------------------------------
// Messages

/// Everything a junction needs to know about a vehicle it is routing.
struct VehicleTicket {
  ActorId vehicle;
  std::uint32_t class_index = 0;
  double class_max_speed = 0.0;
  std::int64_t passengers = 0;
  network::JunctionId destination = 0;
  double fuel_remaining = 0.0;
};

struct Tick {};
struct MinuteElapsed {
  std::uint64_t minute = 0;
};
struct RequestEntry {
  VehicleTicket ticket;
  std::optional<network::RoadId> via;  // road just completed; empty at spawn
};
enum class Disposition : std::uint8_t { enter_road, delivered, dead_end };
struct GrantEntry {
  Disposition disposition = Disposition::enter_road;
  network::RoadId road = 0;
  double speed = 0.0;  // locked for the whole road
  network::Route route;
};
/// Sent to the owner of `road` (its from-junction) when a vehicle leaves it at the far end.
struct VehicleArrived {
  ActorId vehicle;
  network::RoadId road = 0;
};
struct SpawnVehicle {
  VehicleTicket ticket;
  network::JunctionId source = 0;
};
struct Crash {
  ActorId vehicle;
  network::JunctionId junction = 0;
  std::int64_t passengers = 0;
};
struct FuelExhausted {
  ActorId vehicle;
  std::int64_t passengers = 0;
  std::optional<network::RoadId> road;  // set when the vehicle died on a road
};
struct StatsDelta {
  std::int64_t delivered_vehicles = 0;
  std::int64_t passengers_delivered = 0;
  std::int64_t replan_dead_ends = 0;
  std::int64_t passengers_stranded = 0;
};
struct StatsReport {
  StatsDelta delta;
  std::optional<ActorId> removed_vehicle;
};
struct Shutdown {};

/// Alternative order matches MessageTag.
using Payload = std::variant<Tick, MinuteElapsed, RequestEntry, GrantEntry, VehicleArrived,
                             SpawnVehicle, Crash, FuelExhausted, StatsReport, Shutdown>;

enum class MessageTag : std::uint8_t {
  Tick,
  MinuteElapsed,
  RequestEntry,
  GrantEntry,
  VehicleArrived,
  SpawnVehicle,
  Crash,
  FuelExhausted,
  StatsReport,
  Shutdown,
};

std::string_view to_string(MessageTag tag);

struct Message {
  std::uint64_t tick = 0;
  ActorId to;
  ActorId from;
  std::uint64_t send_seq = 0;
  Payload payload;

  MessageTag tag() const noexcept { return static_cast<MessageTag>(payload.index()); }
};

/// Delivery order within a tick.
inline bool delivery_before(const Message& a, const Message& b) noexcept {
  if (a.tick != b.tick) return a.tick < b.tick;
  if (a.to != b.to) return a.to < b.to;
  if (a.from != b.from) return a.from < b.from;
  return a.send_seq < b.send_seq;
}

/// Per-actor FIFO. Messages from one sender must arrive in send_seq order.
class Mailbox {
 public:
  void push(Message msg);
  std::optional<Message> pop();
  bool empty() const noexcept { return queue_.empty(); }
  std::size_t size() const noexcept { return queue_.size(); }

 private:
  std::deque<Message> queue_;
  std::map<ActorId, std::uint64_t> last_seq_;
};

// ---------------------------------------------------------------------------
// Actors

class Context;

class Actor {
 public:
  virtual ~Actor() = default;
  virtual void receive(const Message& msg, Context& ctx) = 0;
};

class RuntimeStopped : public std::logic_error {
 public:
  RuntimeStopped() : std::logic_error("runtime has shut down") {}
};

class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExecutionMode { deterministic, parallel };

struct RuntimeOptions {
  std::uint32_t shards = 1;
  ExecutionMode mode = ExecutionMode::deterministic;
  bool record_trace = false;
};

struct TraceEntry {
  std::uint64_t tick = 0;
  ActorId to;
  ActorId from;
  std::uint64_t send_seq = 0;
  MessageTag tag = MessageTag::Tick;
  bool dropped = false;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct RunStats {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight_at_shutdown = 0;
  std::uint64_t rounds = 0;
  std::uint64_t first_tick = 0;
  std::uint64_t final_tick = 0;
  std::vector<std::uint64_t> shard_queue_peaks;

  std::uint64_t ticks_elapsed() const noexcept { return final_tick - first_tick; }
};

class Runtime;

/// Handed to an actor while it processes one message.
class Context {
 public:
  ActorId self() const noexcept { return self_; }
  std::uint64_t tick() const noexcept { return tick_; }

  /// Delivered in the next round of the current tick.
  void send(ActorId to, Payload payload);
  /// Delivered at `tick`, which must not be in the past.
  void send_at(ActorId to, Payload payload, std::uint64_t tick);
  /// The new actor becomes addressable from the next round.
  ActorId spawn(ActorKind kind, std::unique_ptr<Actor> actor);
  /// Removes the calling actor once the current message is handled.
  void stop() noexcept { stop_requested_ = true; }

 private:
  friend class Runtime;
  struct ShardScratch;

  Context(Runtime& rt, ShardScratch& scratch) : rt_(&rt), scratch_(&scratch) {}

  Runtime* rt_;
  ShardScratch* scratch_;
  ActorId self_;
  std::uint64_t tick_ = 0;
  std::uint64_t* seq_ = nullptr;
  bool stop_requested_ = false;
};

class Runtime {
 public:
  explicit Runtime(RuntimeOptions opts = {});
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const RuntimeOptions& options() const noexcept { return opts_; }

  ActorId spawn(ActorKind kind, std::unique_ptr<Actor> actor);

  /// Injects a message from the controlling thread.
  void post(ActorId to, Payload payload, std::uint64_t tick = 0);
  /// Injects a message as if `from` had sent it, consuming from's send_seq.
  void post_from(ActorId from, ActorId to, Payload payload, std::uint64_t tick = 0);

  /// Processes messages until a Shutdown message is delivered to a director.
  /// Throws DeadlockError if nothing is pending before that happens.
  const RunStats& run();

  /// Called with the tick number each time a tick has fully drained.
  void set_tick_hook(std::function<void(std::uint64_t)> hook) { tick_hook_ = std::move(hook); }

  bool stopped() const noexcept { return stopped_; }
  bool alive(ActorId id) const noexcept;
  std::size_t live_count(ActorKind kind) const noexcept;
  std::uint64_t now() const noexcept { return now_; }

  Actor* find(ActorId id) noexcept;
  const Actor* find(ActorId id) const noexcept;
  template <typename T>
  T* find_as(ActorId id) noexcept {
    return dynamic_cast<T*>(find(id));
  }

  /// Visits live actors of one kind in serial order.
  void for_each_live(ActorKind kind, const std::function<void(ActorId, Actor&)>& fn);

  const RunStats& stats() const noexcept { return stats_; }
  const std::vector<TraceEntry>& trace() const noexcept { return trace_; }

 private:
  friend class Context;

  struct Record {
    std::unique_ptr<Actor> actor;
    bool alive = false;
    std::uint32_t shard = 0;
    std::uint64_t next_seq = 0;
    Mailbox mailbox;
  };

  struct PendingSpawn {
    ActorId id;
    std::unique_ptr<Actor> actor;
  };

  Record* record(ActorId id) noexcept;
  const Record* record(ActorId id) const noexcept;
  ActorId allocate(ActorKind kind);
  void enqueue(Message msg);
  void process_round();
  void run_shard(Context::ShardScratch& scratch, const std::vector<ActorId>& recipients);

  RuntimeOptions opts_;
  std::array<std::vector<Record>, kActorKindCount> registry_;
  std::array<std::atomic<std::uint64_t>, kActorKindCount> next_serial_{};
  std::vector<Message> current_;
  std::map<std::uint64_t, std::vector<Message>> future_;
  std::uint64_t now_ = 0;
  std::uint64_t external_seq_ = 0;
  bool started_ = false;
  bool stopped_ = false;
  RunStats stats_;
  std::vector<TraceEntry> trace_;
  std::function<void(std::uint64_t)> tick_hook_;
};

}  // namespace parsim::actor
