#include "diamond/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <latch>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include "diamond/diagnostics.hpp"
#include "diamond/errors.hpp"

namespace diamond {

Partition partition(int N, int p) {
  if (p < 1) throw InvalidArgument("partition: need at least one worker");
  if (p > N) {
    std::ostringstream os;
    os << "partition: " << p << " workers for " << N << " diamonds";
    throw InvalidArgument(os.str());
  }
  Partition part;
  part.N = N;
  part.p = p;
  part.k = N / p;
  part.n = N - p * part.k;
  part.sizes.assign(p, part.k);
  for (int w = p - part.n; w < p; ++w) part.sizes[w] += 1;
  part.offsets.assign(p, 0);
  for (int w = 1; w < p; ++w) part.offsets[w] = part.offsets[w - 1] + part.sizes[w - 1];
  part.root = 0;
  return part;
}

double SpeedupModel::max_speedup() const {
  return B > 0.0 ? 1.0 / B : std::numeric_limits<double>::infinity();
}

SpeedupModel fit_serial_fraction(const std::vector<std::pair<int, double>>& timings) {
  double t1_sum = 0.0;
  int t1_count = 0;
  bool other = false;
  for (const auto& [n, t] : timings) {
    if (n < 1) throw InvalidArgument("fit_serial_fraction: worker count must be >= 1");
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw InvalidArgument("fit_serial_fraction: wall times must be positive");
    }
    if (n == 1) {
      t1_sum += t;
      ++t1_count;
    } else {
      other = true;
    }
  }
  if (t1_count == 0 || !other) {
    throw InvalidArgument("fit_serial_fraction: need timings for 1 worker and at least one other count");
  }
  SpeedupModel m;
  m.T1 = t1_sum / t1_count;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [n, t] : timings) {
    if (n == 1) continue;
    const double x = 1.0 - 1.0 / n;
    const double y = t / m.T1 - 1.0 / n;
    sxy += x * y;
    sxx += x * x;
  }
  m.B = std::clamp(sxy / sxx, 0.0, 1.0);
  return m;
}

namespace {

using Clock = std::chrono::steady_clock;

struct StripResult {
  int worker = 0;
  std::vector<EdgeData> edges;  // this strip's edges [2 off, 2 end)
  std::vector<Snapshot> snapshots;
  NewtonTally tally;
  double max_abs_u = 0.0;
  long messages = 0;
  Clock::time_point started;
  Clock::time_point finished;
};

struct Failure {
  std::mutex mu;
  bool set = false;
  std::string what;
  int worker = -1;
  long step = -1;

  void record(const std::string& msg, int w, long s) {
    std::lock_guard<std::mutex> lock(mu);
    if (set) return;
    set = true;
    what = msg;
    worker = w;
    step = s;
  }
};

// Raised inside a worker when a channel it waits on was closed by an abort.
struct ChannelClosed {};

class Worker {
 public:
  Worker(const SchemeContext& ctx, const Partition& part, int id,
         std::vector<Channel<EdgeData>>& from_left, std::vector<Channel<EdgeData>>& from_right,
         Channel<StripResult>& gather, const ZigZagState& init, const RunOptions& opts,
         long steps)
      : ctx_(ctx),
        part_(part),
        id_(id),
        off_(part.offsets[id]),
        end_(part.end(id)),
        from_left_(from_left),
        from_right_(from_right),
        gather_(gather),
        opts_(opts),
        steps_(steps) {
    state_.phase = init.phase;
    state_.row_time = init.row_time;
    state_.edges.resize(init.edges.size());
    for (int e = 2 * off_; e < 2 * end_; ++e) state_.edges[e] = init.edges[e];
  }

  long step() const { return step_; }

  // Runs the step loop; the root also gathers and returns the whole result.
  std::optional<StripResult> operator()(std::latch& start) {
    start.arrive_and_wait();
    StripResult res;
    res.started = Clock::now();
    const int N = ctx_.mesh.N;
    const bool periodic = ctx_.bc.periodic();
    const int p = part_.p;
    const int left = periodic ? (id_ + p - 1) % p : id_ - 1;
    const int right = periodic ? (id_ + 1) % p : (id_ + 1 < p ? id_ + 1 : -1);
    const bool has_left = periodic || id_ > 0;
    const bool has_right = periodic || end_ < N;

    res.worker = id_;
    res.max_abs_u = strip_max();
    const long every = 2L * opts_.snapshot_every;
    if (every > 0) res.snapshots.push_back(local_snapshot(0));

    std::vector<EdgeData> next(state_.edges.size());
    for (step_ = 0; step_ < steps_; ++step_) {
      const Phase phase = state_.phase;
      if (phase == Phase::ValleyAtLeft) {
        // Send the last edge of the strip right, then take the one needed
        // by the first diamond from the left.
        if (has_right) {
          send(from_left_[right], state_.edges[2 * end_ - 1], res);
        }
        EdgeData incoming;
        if (has_left) incoming = receive(from_left_[id_]);
        const EdgeData* wrap = (periodic && off_ == 0) ? &incoming : nullptr;
        std::vector<EdgeData>& in = state_.edges;
        if (has_left && off_ > 0) in[2 * off_ - 1] = incoming;

        const int last = (!periodic && end_ == N) ? N : end_ - 1;
        for (int k = off_; k <= last; ++k) {
          solve_row_diamond(ctx_, phase, state_.row_time, in, wrap, k, next, &res.tally);
        }
        // The first diamond's upper-left edge belongs to the left neighbour.
        if (has_left) {
          const int slot = off_ == 0 ? 2 * N - 1 : 2 * off_ - 1;
          send(from_right_[left], std::move(next[slot]), res);
        }
        if (has_right) next[2 * end_ - 1] = receive(from_right_[id_]);
        if (off_ > 0) state_.edges[2 * off_ - 1] = EdgeData();
      } else {
        for (int k = off_; k < end_; ++k) {
          solve_row_diamond(ctx_, phase, state_.row_time, state_.edges, nullptr, k, next,
                            &res.tally);
        }
      }
      for (int e = 2 * off_; e < 2 * end_; ++e) state_.edges[e] = std::move(next[e]);
      state_.phase = phase == Phase::ValleyAtLeft ? Phase::PeakAtLeft : Phase::ValleyAtLeft;
      state_.row_time += 0.5 * ctx_.mesh.dt;
      res.max_abs_u = std::max(res.max_abs_u, strip_max());
      if (every > 0 && (step_ + 1) % every == 0) res.snapshots.push_back(local_snapshot(step_ + 1));
    }
    res.finished = Clock::now();
    res.edges.assign(std::make_move_iterator(state_.edges.begin() + 2 * off_),
                     std::make_move_iterator(state_.edges.begin() + 2 * end_));

    if (id_ != part_.root) {
      gather_.send(std::move(res));
      return std::nullopt;
    }
    return gather_at_root(std::move(res));
  }

 private:
  void send(Channel<EdgeData>& ch, EdgeData e, StripResult& res) {
    ch.send(std::move(e));
    res.messages += 1;
  }

  template <typename T>
  T receive(Channel<T>& ch) {
    std::optional<T> v = ch.recv();
    if (!v) throw ChannelClosed{};
    return std::move(*v);
  }

  double strip_max() const {
    double m = 0.0;
    for (int e = 2 * off_; e < 2 * end_; ++e) {
      m = std::max(m, state_.edges[e].values.row(0).cwiseAbs().maxCoeff());
    }
    return m;
  }

  Snapshot local_snapshot(long half_step) const {
    return take_snapshot(state_, ctx_.mesh, ctx_.tab, half_step, 2 * off_, 2 * end_);
  }

  StripResult gather_at_root(StripResult own) {
    std::vector<StripResult> parts(part_.p);
    parts[id_] = std::move(own);
    for (int i = 1; i < part_.p; ++i) {
      StripResult r = receive(gather_);
      const int w = r.worker;
      parts[w] = std::move(r);
    }
    StripResult all;
    all.worker = id_;
    all.started = parts[0].started;
    all.finished = parts[0].finished;
    for (auto& s : parts) {
      all.edges.insert(all.edges.end(), std::make_move_iterator(s.edges.begin()),
                       std::make_move_iterator(s.edges.end()));
      all.tally.merge(s.tally);
      all.max_abs_u = std::max(all.max_abs_u, s.max_abs_u);
      all.messages += s.messages;
      all.started = std::min(all.started, s.started);
      all.finished = std::max(all.finished, s.finished);
    }
    // Snapshots are concatenated strip by strip at each recorded step.
    const std::size_t count = parts[0].snapshots.size();
    for (std::size_t k = 0; k < count; ++k) {
      Snapshot snap;
      snap.half_step = parts[0].snapshots[k].half_step;
      Eigen::Index rows = 0;
      for (const auto& s : parts) rows += s.snapshots[k].rows.rows();
      snap.rows.resize(rows, parts[0].snapshots[k].rows.cols());
      Eigen::Index at = 0;
      for (const auto& s : parts) {
        const auto& m = s.snapshots[k].rows;
        snap.rows.middleRows(at, m.rows()) = m;
        at += m.rows();
      }
      all.snapshots.push_back(std::move(snap));
    }
    return all;
  }

  const SchemeContext& ctx_;
  const Partition& part_;
  int id_;
  int off_;
  int end_;
  std::vector<Channel<EdgeData>>& from_left_;
  std::vector<Channel<EdgeData>>& from_right_;
  Channel<StripResult>& gather_;
  const RunOptions& opts_;
  long steps_;
  long step_ = 0;
  ZigZagState state_;
};

}  // namespace

RunReport parallel_run(const WaveProblem& problem, const MeshConfig& mesh, const RKTableau& tab,
                       const BoundarySpec& bc, const SolverConfig& cfg, const RunOptions& opts,
                       int workers) {
  if (workers < 1) throw InvalidArgument("parallel_run: workers must be >= 1");
  const long steps = half_steps_for(mesh);
  const Partition part = partition(mesh.N, workers);
  const SchemeContext ctx(problem, mesh, tab, bc, cfg);

  RunReport rep;
  rep.problem = problem.name;
  rep.r = tab.r;
  rep.mesh = mesh;
  rep.init = opts.init;
  rep.bc = bc_code(bc.left.kind, bc.right.kind);
  rep.half_steps = steps;
  rep.workers = workers;

  const ZigZagState init = initialize(opts.init, problem, mesh, tab, cfg, &rep.newton);
  rep.initial_max_abs_u = max_abs_u(init);

  std::vector<Channel<EdgeData>> from_left(workers);
  std::vector<Channel<EdgeData>> from_right(workers);
  Channel<StripResult> gather;
  Failure failure;
  std::optional<StripResult> root_result;

  auto abort_all = [&] {
    for (auto& c : from_left) c.close();
    for (auto& c : from_right) c.close();
    gather.close();
  };

  std::vector<std::unique_ptr<Worker>> pool;
  for (int w = 0; w < workers; ++w) {
    pool.push_back(std::make_unique<Worker>(ctx, part, w, from_left, from_right, gather, init,
                                            opts, steps));
  }
  std::latch start(workers + 1);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        auto out = (*pool[w])(start);
        if (out) root_result = std::move(out);
      } catch (const ChannelClosed&) {
        // another worker failed first
      } catch (const std::exception& e) {
        failure.record(e.what(), w, pool[w]->step());
        abort_all();
      } catch (...) {
        failure.record("unknown error", w, pool[w]->step());
        abort_all();
      }
    });
  }
  // Timed from the workers' own clocks: on a busy machine this thread may
  // not be scheduled again until they are done.
  start.arrive_and_wait();
  for (auto& t : threads) t.join();

  if (failure.set) {
    std::ostringstream os;
    os << "worker " << failure.worker << " failed at half-step " << failure.step << ": "
       << failure.what;
    throw AbortedRun(os.str(), failure.worker, failure.step);
  }
  if (!root_result) throw AbortedRun("gather did not complete", part.root, steps);

  StripResult& all = *root_result;
  rep.wall_seconds = std::chrono::duration<double>(all.finished - all.started).count();
  rep.newton.merge(all.tally);
  rep.max_abs_u = std::max(rep.initial_max_abs_u, all.max_abs_u);
  rep.messages = all.messages;
  rep.snapshots = std::move(all.snapshots);
  rep.final_state.edges = std::move(all.edges);
  rep.final_state.phase = steps % 2 == 0 ? init.phase
                          : (init.phase == Phase::ValleyAtLeft ? Phase::PeakAtLeft
                                                               : Phase::ValleyAtLeft);
  rep.final_state.row_time = init.row_time;
  for (long s = 0; s < steps; ++s) rep.final_state.row_time += 0.5 * mesh.dt;
  if (problem.exact) rep.error = error_norm(rep.final_state, problem, mesh, tab);
  return rep;
}

}  // namespace diamond
