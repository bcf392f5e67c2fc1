#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace ibpf;

namespace {

void expect_columns(const BlockLayout& layout, const std::vector<double>& w, double floor) {
  for (const auto& seg : layout)
    for (std::size_t j = 0; j < seg.n_in; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < seg.n_out; ++i) {
        EXPECT_GE(w[seg.index(i, j)], floor);
        s += w[seg.index(i, j)];
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

}  // namespace

TEST(InnerSolver, ColumnSumsAndFloorPreserved) {
  CounterRng rng(31);
  const auto j = oracle::random_joint(rng, 4, 3);
  for (auto f : {Formulation::IbTh, Formulation::IbMv, Formulation::Pf}) {
    const auto pr = build_problem(f, f == Formulation::Pf ? 3.0 : 0.3, j, 3, 5.0);
    auto s = oracle::interior_state(pr, rng, 2.0);
    InnerConfig cfg;
    cfg.inner_steps = 20;
    cfg.step0 = 0.5;
    for (auto b : {Block::P, Block::Q}) {
      const auto res = block_minimize(pr, s, b, cfg);
      expect_columns(pr.layout(b), res.block, pr.eps_floor);
      s.block(b) = res.block;
    }
  }
}

TEST(InnerSolver, MonotoneOnExampleInstance) {
  CounterRng rng(32);
  const auto j = oracle::example_joint();
  for (auto f : {Formulation::IbTh, Formulation::IbMv, Formulation::Pf}) {
    const auto pr = build_problem(f, f == Formulation::Pf ? 3.0 : 0.154, j, 3, 8.0);
    auto s = oracle::interior_state(pr, rng);
    double prev = eval(pr, s);
    for (int it = 0; it < 100; ++it) {
      const Block b = it % 2 ? Block::Q : Block::P;
      s.block(b) = block_minimize(pr, s, b, {}).block;
      const double now = eval(pr, s);
      EXPECT_LE(now, prev + 1e-14 * std::max(1.0, std::abs(prev)));
      prev = now;
    }
  }
}

TEST(InnerSolver, ConvergesOnStronglyConvexSlice) {
  // p block of IB-TH: (gamma-1) H(Z) + c/2 ||p - Q_x q||^2 + <nu, p>, strictly convex
  CounterRng rng(33);
  const auto j = oracle::example_joint();
  const auto pr = build_ib_th(0.3, j, 3, 4.0);
  auto s = oracle::interior_state(pr, rng, 0.5);
  InnerConfig cfg;
  cfg.inner_steps = 2000;
  cfg.step0 = 0.2;
  s.p = block_minimize(pr, s, Block::P, cfg).block;
  const auto g = tangent_projection(pr.p_layout, grad_p(pr, s));
  for (double v : g) EXPECT_NEAR(v, 0.0, 1e-8);
}

TEST(InnerSolver, ZeroGradientLeavesBlock) {
  // symmetric state: every component of grad_p is equal
  const auto j = oracle::example_joint();
  const auto pr = build_ib_th(0.3, j, 2, 2.0);
  BlockState s;
  s.p = {0.5, 0.5};
  s.q.assign(6, 0.5);
  s.nu = {0.25, 0.25};
  const auto res = block_minimize(pr, s, Block::P, {});
  EXPECT_EQ(res.block, s.p);
  EXPECT_FALSE(res.stalled);
  EXPECT_EQ(res.accepted_steps, 0);
}

TEST(InnerSolver, StallFlagOnExhaustedBacktracking) {
  const auto j = oracle::example_joint();
  const auto pr = build_ib_th(0.3, j, 3, 2.0);
  BlockState s;
  s.p = {0.2, 0.3, 0.5};
  s.q.assign(9, 1.0 / 3);
  s.nu = {0.0, 0.0, 0.0};
  InnerConfig cfg;
  cfg.step0 = 1e6;
  cfg.max_backtracks = 0;
  const auto res = block_minimize(pr, s, Block::P, cfg);
  EXPECT_TRUE(res.stalled);
  EXPECT_EQ(res.block, s.p);
}

TEST(InnerSolver, ConfigValidation) {
  InnerConfig cfg;
  cfg.inner_steps = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.backtrack = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.step0 = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
