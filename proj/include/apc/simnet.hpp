#pragma once

// In-process master/worker star network.
//
// One thread per worker, each owning its block program for the whole run.
// The master broadcasts x-bar(t) on every worker's inbound channel, then
// waits for exactly one response per worker on the outbound channels before
// folding them in ascending block order. Channels are reliable FIFO queues.

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <iosfwd>
#include <mutex>

#include "apc/solvers.hpp"

namespace apc {

struct RoundMessage {
  enum class Kind { Broadcast, Response, Halt };
  Kind kind = Kind::Broadcast;
  std::size_t round = 0;
  std::size_t worker = 0;
  Vector payload;
  // Set on a Response when the worker's step threw.
  std::exception_ptr failure;
};

std::string_view to_string(RoundMessage::Kind kind);

// Unbounded FIFO channel, safe for one producer and one consumer thread.
template <class T>
class Channel {
 public:
  void send(T value) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(value));
    }
    ready_.notify_one();
  }

  T receive() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return !queue_.empty(); });
    T value = std::move(queue_.front());
    queue_.pop_front();
    return value;
  }

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<T> queue_;
};

struct MessageStats {
  std::size_t rounds = 0;
  std::size_t messages = 0;
  std::size_t bytes = 0;
};

// rounds x 2m messages (one broadcast copy per worker plus one response),
// each carrying n scalars of scalar_width bytes. Halt messages are not counted.
MessageStats message_stats(std::size_t rounds, std::size_t m, std::size_t n, std::size_t scalar_width = 8);

struct SimulationOptions {
  // When set, one JSON object per message: {"kind","round","worker","payload_length"}.
  std::ostream* message_log = nullptr;
};

struct SimulationResult {
  IterationTrace trace;
  MessageStats stats;
};

// Runs params.method over the simulated network. The trace is identical to
// the sequential engine's for the same inputs.
SimulationResult run_simulated(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget,
                               const SimulationOptions& options = {});

}  // namespace apc
