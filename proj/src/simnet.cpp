#include "apc/simnet.hpp"

#include <ostream>
#include <string>
#include <thread>

#include <json.hpp>

#include "apc/error.hpp"

namespace apc {

std::string_view to_string(RoundMessage::Kind kind) {
  switch (kind) {
    case RoundMessage::Kind::Broadcast: return "broadcast";
    case RoundMessage::Kind::Response: return "response";
    case RoundMessage::Kind::Halt: return "halt";
  }
  return "unknown";
}

MessageStats message_stats(std::size_t rounds, std::size_t m, std::size_t n, std::size_t scalar_width) {
  const std::size_t messages = rounds * 2 * m;
  return {rounds, messages, messages * n * scalar_width};
}

namespace {

struct Link {
  Channel<RoundMessage> to_worker;
  Channel<RoundMessage> to_master;
};

class MessageLog {
 public:
  explicit MessageLog(std::ostream* out) : out_(out) {}

  void record(const RoundMessage& msg) {
    if (out_ == nullptr) return;
    nlohmann::json line = {{"kind", to_string(msg.kind)},
                           {"round", msg.round},
                           {"worker", msg.worker},
                           {"payload_length", msg.payload.size()}};
    *out_ << line.dump() << '\n';
  }

 private:
  std::ostream* out_;
};

void worker_loop(WorkerProgram& program, std::size_t index, Link& link) {
  for (;;) {
    RoundMessage msg = link.to_worker.receive();
    if (msg.kind == RoundMessage::Kind::Halt) return;
    RoundMessage reply{RoundMessage::Kind::Response, msg.round, index, {}, nullptr};
    try {
      reply.payload = program.respond(msg.payload);
    } catch (...) {
      reply.failure = std::current_exception();
    }
    link.to_master.send(std::move(reply));
  }
}

}  // namespace

SimulationResult run_simulated(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget,
                               const SimulationOptions& options) {
  DistributedProgram prog = make_program(sys, params, budget);
  const std::size_t m = prog.workers.size();
  std::vector<Link> links(m);
  MessageLog log(options.message_log);

  std::vector<std::jthread> threads;
  threads.reserve(m);
  for (std::size_t i = 0; i < m; ++i)
    threads.emplace_back([&, i] { worker_loop(*prog.workers[i], i, links[i]); });

  auto halt_all = [&](std::size_t round) {
    for (std::size_t i = 0; i < m; ++i) {
      RoundMessage halt{RoundMessage::Kind::Halt, round, i, {}, nullptr};
      log.record(halt);
      links[i].to_worker.send(std::move(halt));
    }
    threads.clear();  // joins
  };

  std::size_t round = 0;
  auto exchange = [&](std::span<const double> broadcast, std::vector<Vector>& responses) {
    for (std::size_t i = 0; i < m; ++i) {
      RoundMessage msg{RoundMessage::Kind::Broadcast, round, i, Vector(broadcast.begin(), broadcast.end()), nullptr};
      log.record(msg);
      links[i].to_worker.send(std::move(msg));
    }
    // Barrier: one response per worker, consumed in block order.
    std::exception_ptr failure;
    for (std::size_t i = 0; i < m; ++i) {
      RoundMessage reply = links[i].to_master.receive();
      log.record(reply);
      if (reply.kind != RoundMessage::Kind::Response || reply.round != round || reply.worker != i) {
        failure = std::make_exception_ptr(
            Error(ErrorCode::VerificationFailed, "out-of-order message from worker " + std::to_string(i)));
      } else if (reply.failure && !failure) {
        failure = reply.failure;
      }
      responses[i] = std::move(reply.payload);
    }
    if (failure) std::rethrow_exception(failure);
    ++round;
  };

  SimulationResult result;
  try {
    result.trace = drive(sys, *prog.master, m, params, budget, exchange);
  } catch (...) {
    halt_all(round);
    throw;
  }
  halt_all(round);
  result.stats = message_stats(round, m, sys.cols());
  return result;
}

}  // namespace apc
