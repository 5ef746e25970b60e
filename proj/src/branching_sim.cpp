#include "bse/branching_sim.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "bse/parallel.hpp"
#include "bse/path_supremum.hpp"

namespace bse {

namespace {
constexpr int kEdgeStepFloor = 64;

int edge_steps(int steps_per_unit, double duration) {
  const double wanted = std::ceil(steps_per_unit * duration);
  if (wanted <= kEdgeStepFloor) return kEdgeStepFloor;
  return static_cast<int>(wanted);
}
}  // namespace

OffspringLaw make_offspring_law(const std::vector<double>& probs) {
  if (probs.empty()) throw std::invalid_argument("offspring law: empty probability list");
  OffspringLaw law;
  law.probs = probs;
  double sum = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n) {
    const double p = probs[n];
    if (!(p >= 0.0)) throw std::invalid_argument("offspring law: negative probability");
    sum += p;
    const double nn = static_cast<double>(n);
    law.m += nn * p;
    law.sigma2 += nn * (nn - 1.0) * p;
    law.m3 += nn * nn * nn * p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("offspring law: probabilities must sum to 1");
  if (probs.size() > 1 && probs[1] == 1.0)
    throw std::invalid_argument("offspring law: p_1 = 1 is the trivial law");
  if (law.m > 1.0 + 1e-12)
    throw std::invalid_argument("offspring law: supercritical (mean > 1) laws are out of scope");
  return law;
}

RunResult simulate_run(const StableParams& params, const OffspringLaw& law, const SimCaps& caps,
                       int steps_per_unit, std::uint64_t run_key) {
  if (caps.max_particles < 1 || !(caps.max_time > 0.0))
    throw std::invalid_argument("simulate_run: caps must be positive");
  if (steps_per_unit < 1) throw std::invalid_argument("simulate_run: steps_per_unit must be >= 1");

  struct Node {
    std::uint64_t key;
    double birth_pos;
    double birth_time;
  };
  std::vector<Node> stack;
  stack.push_back({run_key, 0.0, 0.0});

  RunResult r;
  r.particles = 1;

  while (!stack.empty()) {
    const Node nd = stack.back();
    stack.pop_back();

    SplitMix64 g(substream(nd.key, 0));
    const double lifetime = exponential(g);

    double duration = lifetime;
    bool clipped = false;
    if (nd.birth_time + lifetime > caps.max_time) {
      duration = caps.max_time - nd.birth_time;
      clipped = true;
      r.truncated = true;
    }
    if (duration > 0.0) {
      const PathExtrema pe =
          walk_path(params, duration, edge_steps(steps_per_unit, duration), g);
      if (nd.birth_pos + pe.supremum > r.max) r.max = nd.birth_pos + pe.supremum;
      if (clipped) continue;

      const int n = law.sample(g);
      const std::int64_t room = caps.max_particles - r.particles;
      const int pushed = static_cast<int>(std::min<std::int64_t>(n, room));
      if (pushed < n) r.truncated = true;
      for (int i = 0; i < pushed; ++i)
        stack.push_back({substream(nd.key, static_cast<std::uint64_t>(i) + 1),
                         nd.birth_pos + pe.terminal, nd.birth_time + lifetime});
      r.particles += pushed;
    }
  }
  r.extinct = !r.truncated;
  return r;
}

std::vector<RunResult> run_batch(const StableParams& params, const OffspringLaw& law,
                                 const SimCaps& caps, int steps_per_unit, std::int64_t count,
                                 std::uint64_t seed, int threads) {
  std::vector<RunResult> out(static_cast<std::size_t>(count));
  parallel_for(count, threads, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i)
      out[static_cast<std::size_t>(i)] =
          simulate_run(params, law, caps, steps_per_unit, substream(seed, i));
  });
  return out;
}

std::int64_t population_at(const OffspringLaw& law, double t, SplitMix64& g) {
  if (!(t > 0.0)) throw std::invalid_argument("population_at: t must be > 0");
  std::int64_t alive = 1;
  double clock = 0.0;
  while (alive > 0) {
    clock += exponential(g) / static_cast<double>(alive);
    if (clock > t) break;
    alive += law.sample(g) - 1;
  }
  return alive;
}

double survival_estimate(const OffspringLaw& law, double t, std::int64_t reps, std::uint64_t seed,
                         int threads) {
  if (reps < 1) throw std::invalid_argument("survival_estimate: reps must be >= 1");
  const int nthreads = resolve_threads(threads);
  std::vector<std::int64_t> alive_counts(nthreads, 0);
  std::atomic<int> next_slot{0};
  parallel_for(reps, nthreads, [&](std::int64_t lo, std::int64_t hi) {
    const int slot = next_slot.fetch_add(1);
    std::int64_t alive = 0;
    for (std::int64_t i = lo; i < hi; ++i) {
      SplitMix64 g(substream(seed, i));
      if (population_at(law, t, g) >= 1) ++alive;
    }
    alive_counts[slot] += alive;
  });
  std::int64_t total = 0;
  for (const auto c : alive_counts) total += c;
  return static_cast<double>(total) / static_cast<double>(reps);
}

}  // namespace bse
