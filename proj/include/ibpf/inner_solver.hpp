#pragma once

// Approximate block argmin by mean-subtracted gradient steps on a compound
// simplex. Subtracting the per-column mean keeps every column sum fixed; the
// step is backtracked until all masses stay above the floor and L_c does not
// increase.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ibpf/auglag.hpp"
#include "ibpf/error.hpp"

namespace ibpf {

struct InnerConfig {
  int inner_steps = 1;
  double step0 = 0.01;
  double backtrack = 0.5;
  int max_backtracks = 40;

  void validate() const {
    if (inner_steps < 1) throw ConfigError("inner_steps must be >= 1");
    if (!(step0 > 0.0)) throw ConfigError("step0 must be > 0");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("backtrack must be in (0,1)");
    if (max_backtracks < 0) throw ConfigError("max_backtracks must be >= 0");
  }
};

struct BlockStepResult {
  std::vector<double> block;
  int accepted_steps = 0;
  bool stalled = false;  // backtracking exhausted on some step
};

namespace detail {

// Absorbs rounding noise in L_c comparisons.
inline bool not_increased(double after, double before) {
  return after <= before + 1e-14 * std::max(1.0, std::abs(before));
}

}  // namespace detail

/// Runs cfg.inner_steps mean-subtracted gradient steps on one block of `state`
/// (the other block and nu are held fixed) and returns the updated block.
inline BlockStepResult block_minimize(const SplitProblem& pr, const BlockState& state, Block block,
                                      const InnerConfig& cfg) {
  cfg.validate();
  BlockState work = state;
  BlockStepResult res;
  auto& w = work.block(block);
  const auto& layout = pr.layout(block);

  auto objective = [&](const std::vector<double>& candidate) {
    return block == Block::P ? eval_at(pr, candidate, work.q, work.nu)
                             : eval_at(pr, work.p, candidate, work.nu);
  };

  double current = objective(w);
  std::vector<double> trial(w.size());
  for (int step = 0; step < cfg.inner_steps; ++step) {
    const auto g = tangent_projection(layout, grad_block(pr, work, block));
    if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) break;

    double eta = cfg.step0;
    bool accepted = false;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt, eta *= cfg.backtrack) {
      bool in_domain = true;
      for (std::size_t i = 0; i < w.size(); ++i) {
        trial[i] = w[i] - eta * g[i];
        if (!(trial[i] >= pr.eps_floor)) in_domain = false;
      }
      if (!in_domain) continue;
      const double value = objective(trial);
      if (std::isfinite(value) && detail::not_increased(value, current)) {
        w.swap(trial);
        current = value;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }
    ++res.accepted_steps;
  }
  res.block = std::move(w);
  return res;
}

}  // namespace ibpf
