#include "bse/path_supremum.hpp"

#include <stdexcept>

#include "bse/parallel.hpp"

namespace bse {

PathExtrema walk_path(const StableParams& params, double duration, int n_steps, SplitMix64& g) {
  if (n_steps < 1) throw std::invalid_argument("walk_path: n_steps must be >= 1");
  if (!(duration > 0.0)) throw std::invalid_argument("walk_path: duration must be > 0");
  const StableSampler step(params, duration / n_steps);
  double pos = 0.0, sup = 0.0;
  for (int i = 0; i < n_steps; ++i) {
    pos += step(g);
    if (pos > sup) sup = pos;
  }
  return {pos, sup};
}

ExpPairSample sample_pair(const StableParams& params, int n_steps, SplitMix64& g) {
  const double e = exponential(g);
  const PathExtrema pe = walk_path(params, e, n_steps, g);
  return {e, pe.terminal, pe.supremum};
}

ExpPairCloud sample_cloud(const StableParams& params, int n_steps, Eigen::Index count,
                          std::uint64_t seed, int threads) {
  if (count < 1) throw std::invalid_argument("sample_cloud: count must be >= 1");
  ExpPairCloud cloud;
  cloud.e.resize(count);
  cloud.l.resize(count);
  cloud.s.resize(count);
  cloud.n_steps = n_steps;
  cloud.seed = seed;
  parallel_for(count, threads, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      SplitMix64 g(substream(seed, static_cast<std::uint64_t>(i)));
      const ExpPairSample p = sample_pair(params, n_steps, g);
      cloud.e[i] = p.e;
      cloud.l[i] = p.l;
      cloud.s[i] = p.s;
    }
  });
  return cloud;
}

}  // namespace bse
