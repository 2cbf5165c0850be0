#pragma once

#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "diamond/timeloop.hpp"

namespace diamond {

/// Contiguous strips of diamonds, one per worker.  With k = floor(N/p) and
/// n = N - p k, the first p - n workers hold k diamonds and the last n hold
/// k + 1, so the gather root (worker 0) always has a k-strip.
struct Partition {
  int N = 0;
  int p = 0;
  int k = 0;
  int n = 0;
  int root = 0;
  std::vector<int> sizes;
  std::vector<int> offsets;

  int end(int w) const { return offsets[w] + sizes[w]; }
};

/// Throws InvalidArgument unless 1 <= p <= N.
Partition partition(int N, int p);

/// Unbounded FIFO between two threads.  close() wakes every waiter; recv on
/// a closed, drained channel returns nullopt.
template <typename T>
class Channel {
 public:
  void send(T value) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (closed_) return;
      queue_.push_back(std::move(value));
    }
    cv_.notify_one();
  }

  std::optional<T> recv() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return closed_ || !queue_.empty(); });
    if (queue_.empty()) return std::nullopt;
    T v = std::move(queue_.front());
    queue_.pop_front();
    return v;
  }

  void close() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> queue_;
  bool closed_ = false;
};

/// Runs the scheme on `workers` threads, each owning one strip and
/// exchanging one edge with each neighbour per half-step.  Initialization
/// is done once and scattered; the final zig-zag and snapshots are gathered
/// to the root.  wall_seconds covers the step loop only.  A failing worker
/// aborts every channel and the call throws AbortedRun.
RunReport parallel_run(const WaveProblem& problem, const MeshConfig& mesh, const RKTableau& tab,
                       const BoundarySpec& bc, const SolverConfig& cfg, const RunOptions& opts,
                       int workers);

/// Amdahl model S(n) = 1/(B + (1 - B)/n).
struct SpeedupModel {
  double B = 0.0;
  double T1 = 0.0;

  double speedup(double n) const { return 1.0 / (B + (1.0 - B) / n); }
  /// 1/B (infinite for B = 0).
  double max_speedup() const;
};

/// Least-squares fit of B to T(n)/T1 - 1/n = B (1 - 1/n), clamped to [0, 1].
/// Needs worker count 1 and at least one other count; non-positive times
/// throw InvalidArgument.
SpeedupModel fit_serial_fraction(const std::vector<std::pair<int, double>>& timings);

}  // namespace diamond
