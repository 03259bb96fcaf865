#include <algorithm>
#include <exception>
#include <sstream>

#include "parsim/actor.hpp"
#include "parsim/hash.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace parsim::actor {

std::string_view to_string(ActorKind kind) {
  switch (kind) {
    case ActorKind::director: return "director";
    case ActorKind::junction: return "junction";
    case ActorKind::road: return "road";
    case ActorKind::vehicle: return "vehicle";
  }
  return "?";
}

std::string to_string(const ActorId& id) {
  return std::string(to_string(id.kind)) + "#" + std::to_string(id.serial);
}

std::string_view to_string(MessageTag tag) {
  switch (tag) {
    case MessageTag::Tick: return "Tick";
    case MessageTag::MinuteElapsed: return "MinuteElapsed";
    case MessageTag::RequestEntry: return "RequestEntry";
    case MessageTag::GrantEntry: return "GrantEntry";
    case MessageTag::VehicleArrived: return "VehicleArrived";
    case MessageTag::SpawnVehicle: return "SpawnVehicle";
    case MessageTag::Crash: return "Crash";
    case MessageTag::FuelExhausted: return "FuelExhausted";
    case MessageTag::StatsReport: return "StatsReport";
    case MessageTag::Shutdown: return "Shutdown";
  }
  return "?";
}

std::uint64_t actor_hash(const ActorId& id) noexcept {
  const std::uint8_t kind = static_cast<std::uint8_t>(id.kind);
  return fnv1a64_u64(id.serial, fnv1a64(std::span<const std::uint8_t>(&kind, 1)));
}

std::uint32_t shard_of(const ActorId& id, std::uint32_t shard_count) {
  if (shard_count == 0) throw std::invalid_argument("shard count must be >= 1");
  return static_cast<std::uint32_t>(actor_hash(id) % shard_count);
}

void Mailbox::push(Message msg) {
  auto [it, inserted] = last_seq_.try_emplace(msg.from, msg.send_seq);
  if (!inserted) {
    if (msg.send_seq <= it->second) {
      throw std::logic_error("mailbox FIFO violated for sender " + to_string(msg.from));
    }
    it->second = msg.send_seq;
  }
  queue_.push_back(std::move(msg));
}

std::optional<Message> Mailbox::pop() {
  if (queue_.empty()) return std::nullopt;
  Message m = std::move(queue_.front());
  queue_.pop_front();
  return m;
}

// ---------------------------------------------------------------------------

struct Context::ShardScratch {
  std::vector<Message> outbox;
  std::vector<Runtime::PendingSpawn> spawns;
  std::vector<TraceEntry> trace;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t queued = 0;
  bool shutdown = false;
  std::exception_ptr error;
};

void Context::send(ActorId to, Payload payload) { send_at(to, std::move(payload), tick_); }

void Context::send_at(ActorId to, Payload payload, std::uint64_t tick) {
  if (tick < tick_) throw std::logic_error("cannot send into the past");
  scratch_->outbox.push_back(Message{tick, to, self_, (*seq_)++, std::move(payload)});
}

ActorId Context::spawn(ActorKind kind, std::unique_ptr<Actor> actor) {
  if (rt_->stopped_) throw RuntimeStopped();
  const ActorId id = rt_->allocate(kind);
  scratch_->spawns.push_back({id, std::move(actor)});
  return id;
}

// ---------------------------------------------------------------------------

Runtime::Runtime(RuntimeOptions opts) : opts_(opts) {
  if (opts_.shards == 0) throw std::invalid_argument("shard count must be >= 1");
  for (auto& c : next_serial_) c.store(0);
  stats_.shard_queue_peaks.assign(opts_.shards, 0);
}

Runtime::~Runtime() = default;

ActorId Runtime::allocate(ActorKind kind) {
  return ActorId{kind, next_serial_[static_cast<std::size_t>(kind)].fetch_add(1)};
}

Runtime::Record* Runtime::record(ActorId id) noexcept {
  auto& bucket = registry_[static_cast<std::size_t>(id.kind)];
  return id.serial < bucket.size() ? &bucket[id.serial] : nullptr;
}

const Runtime::Record* Runtime::record(ActorId id) const noexcept {
  const auto& bucket = registry_[static_cast<std::size_t>(id.kind)];
  return id.serial < bucket.size() ? &bucket[id.serial] : nullptr;
}

ActorId Runtime::spawn(ActorKind kind, std::unique_ptr<Actor> actor) {
  if (stopped_) throw RuntimeStopped();
  const ActorId id = allocate(kind);
  auto& bucket = registry_[static_cast<std::size_t>(kind)];
  bucket.resize(id.serial + 1);
  Record& rec = bucket[id.serial];
  rec.actor = std::move(actor);
  rec.alive = true;
  rec.shard = shard_of(id, opts_.shards);
  return id;
}

void Runtime::enqueue(Message msg) {
  ++stats_.sent;
  if (started_ && msg.tick == now_) {
    current_.push_back(std::move(msg));
  } else {
    future_[msg.tick].push_back(std::move(msg));
  }
}

void Runtime::post(ActorId to, Payload payload, std::uint64_t tick) {
  if (stopped_) throw RuntimeStopped();
  if (started_ && tick < now_) throw std::logic_error("cannot post into the past");
  enqueue(Message{tick, to, ActorId::external(), external_seq_++, std::move(payload)});
}

void Runtime::post_from(ActorId from, ActorId to, Payload payload, std::uint64_t tick) {
  if (stopped_) throw RuntimeStopped();
  Record* rec = record(from);
  if (rec == nullptr) throw std::invalid_argument("unknown sender " + to_string(from));
  enqueue(Message{tick, to, from, rec->next_seq++, std::move(payload)});
}

bool Runtime::alive(ActorId id) const noexcept {
  const Record* rec = record(id);
  return rec != nullptr && rec->alive;
}

std::size_t Runtime::live_count(ActorKind kind) const noexcept {
  const auto& bucket = registry_[static_cast<std::size_t>(kind)];
  return static_cast<std::size_t>(
      std::count_if(bucket.begin(), bucket.end(), [](const Record& r) { return r.alive; }));
}

Actor* Runtime::find(ActorId id) noexcept {
  Record* rec = record(id);
  return rec != nullptr && rec->alive ? rec->actor.get() : nullptr;
}

const Actor* Runtime::find(ActorId id) const noexcept {
  const Record* rec = record(id);
  return rec != nullptr && rec->alive ? rec->actor.get() : nullptr;
}

void Runtime::for_each_live(ActorKind kind, const std::function<void(ActorId, Actor&)>& fn) {
  auto& bucket = registry_[static_cast<std::size_t>(kind)];
  for (std::size_t s = 0; s < bucket.size(); ++s) {
    if (bucket[s].alive) fn(ActorId{kind, s}, *bucket[s].actor);
  }
}

const RunStats& Runtime::run() {
  if (stopped_) throw RuntimeStopped();
  if (live_count(ActorKind::director) == 0) {
    throw std::logic_error("run() needs a live director actor");
  }
  if (!started_) {
    started_ = true;
    if (future_.empty()) throw DeadlockError("deadlock: nothing to process at start");
    now_ = future_.begin()->first;
    current_ = std::move(future_.begin()->second);
    future_.erase(future_.begin());
    stats_.first_tick = now_;
  }

  while (!stopped_) {
    if (current_.empty()) {
      if (tick_hook_) tick_hook_(now_);
      if (future_.empty()) {
        std::ostringstream diag;
        diag << "deadlock at tick " << now_ << ": all mailboxes empty before Shutdown; live actors";
        for (std::size_t k = 0; k < kActorKindCount; ++k) {
          diag << ' ' << to_string(static_cast<ActorKind>(k)) << '='
               << live_count(static_cast<ActorKind>(k));
        }
        throw DeadlockError(diag.str());
      }
      now_ = future_.begin()->first;
      current_ = std::move(future_.begin()->second);
      future_.erase(future_.begin());
    }
    process_round();
  }

  stats_.final_tick = now_;
  stats_.in_flight_at_shutdown = current_.size();
  for (const auto& [tick, msgs] : future_) stats_.in_flight_at_shutdown += msgs.size();
  return stats_;
}

void Runtime::run_shard(Context::ShardScratch& scratch, const std::vector<ActorId>& recipients) {
  try {
    Context ctx(*this, scratch);
    for (ActorId id : recipients) {
      Record& rec = *record(id);
      while (auto msg = rec.mailbox.pop()) {
        if (!rec.alive) {
          ++scratch.dropped;
          if (opts_.record_trace) {
            scratch.trace.push_back({msg->tick, msg->to, msg->from, msg->send_seq, msg->tag(), true});
          }
          continue;
        }
        ctx.self_ = id;
        ctx.tick_ = now_;
        ctx.seq_ = &rec.next_seq;
        ctx.stop_requested_ = false;
        ++scratch.delivered;
        if (opts_.record_trace) {
          scratch.trace.push_back({msg->tick, msg->to, msg->from, msg->send_seq, msg->tag(), false});
        }
        rec.actor->receive(*msg, ctx);
        if (msg->tag() == MessageTag::Shutdown && id.kind == ActorKind::director) {
          scratch.shutdown = true;
        }
        if (ctx.stop_requested_) {
          rec.alive = false;
          rec.actor.reset();
        }
      }
    }
  } catch (...) {
    scratch.error = std::current_exception();
  }
}

void Runtime::process_round() {
  ++stats_.rounds;
  std::vector<Message> round = std::move(current_);
  current_.clear();
  std::sort(round.begin(), round.end(), delivery_before);

  const bool parallel = opts_.mode == ExecutionMode::parallel && opts_.shards > 1;
  const std::size_t buckets = parallel ? opts_.shards : 1;
  std::vector<std::vector<ActorId>> recipients(buckets);
  std::vector<Context::ShardScratch> scratch(buckets);
  std::vector<std::uint64_t> shard_load(opts_.shards, 0);

  for (Message& msg : round) {
    Record* rec = record(msg.to);
    if (rec == nullptr || !rec->alive) {
      ++stats_.dropped;
      if (opts_.record_trace) {
        trace_.push_back({msg.tick, msg.to, msg.from, msg.send_seq, msg.tag(), true});
      }
      continue;
    }
    ++shard_load[rec->shard];
    const std::size_t b = parallel ? rec->shard : 0;
    if (rec->mailbox.empty()) recipients[b].push_back(msg.to);
    rec->mailbox.push(std::move(msg));
  }
  for (std::size_t s = 0; s < opts_.shards; ++s) {
    stats_.shard_queue_peaks[s] = std::max(stats_.shard_queue_peaks[s], shard_load[s]);
  }

  if (parallel) {
    const int n = static_cast<int>(buckets);
#pragma omp parallel for num_threads(n) schedule(static, 1)
    for (int s = 0; s < n; ++s) {
      run_shard(scratch[static_cast<std::size_t>(s)], recipients[static_cast<std::size_t>(s)]);
    }
  } else {
    run_shard(scratch[0], recipients[0]);
  }

  for (auto& sc : scratch) {
    if (sc.error) std::rethrow_exception(sc.error);
  }

  std::vector<TraceEntry> round_trace;
  for (auto& sc : scratch) {
    stats_.delivered += sc.delivered;
    stats_.dropped += sc.dropped;
    stopped_ = stopped_ || sc.shutdown;
    for (auto& sp : sc.spawns) {
      auto& bucket = registry_[static_cast<std::size_t>(sp.id.kind)];
      if (bucket.size() <= sp.id.serial) bucket.resize(sp.id.serial + 1);
      Record& rec = bucket[sp.id.serial];
      rec.actor = std::move(sp.actor);
      rec.alive = true;
      rec.shard = shard_of(sp.id, opts_.shards);
    }
    if (opts_.record_trace) {
      round_trace.insert(round_trace.end(), sc.trace.begin(), sc.trace.end());
    }
  }
  if (opts_.record_trace) {
    if (parallel) {
      std::stable_sort(round_trace.begin(), round_trace.end(), [](const auto& a, const auto& b) {
        if (a.to != b.to) return a.to < b.to;
        if (a.from != b.from) return a.from < b.from;
        return a.send_seq < b.send_seq;
      });
    }
    trace_.insert(trace_.end(), round_trace.begin(), round_trace.end());
  }

  // Outboxes are concatenated in shard order; the next round sorts them.
  for (auto& sc : scratch) {
    for (Message& msg : sc.outbox) enqueue(std::move(msg));
  }
}

}  // namespace parsim::actor
