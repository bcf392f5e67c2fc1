#pragma once

// Two-block Douglas-Rachford splitting with relaxation alpha.
//
//   Alg1: nu_half = nu - (1-alpha) c (A p - B q)
//         p'      = argmin_p L_c(p, q, nu_half)
//         nu'     = nu_half + c (A p' - B q)
//         q'      = argmin_q L_c(p', q, nu')
//
//   Alg2: p'      = argmin_p L_c(p, q, nu)
//         nu_half = nu - (1-alpha) c (A p' - B q)
//         q'      = argmin_q L_c(p', q, nu_half)
//         nu'     = nu_half + c (A p' - B q')
//
// alpha = 1 is ADMM, alpha = 2 is Peaceman-Rachford. Each argmin is
// approximated by block_minimize.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibpf/auglag.hpp"
#include "ibpf/error.hpp"
#include "ibpf/inner_solver.hpp"
#include "ibpf/plane.hpp"
#include "ibpf/rng.hpp"

namespace ibpf {

enum class Variant { Alg1, Alg2 };

inline const char* to_string(Variant v) { return v == Variant::Alg1 ? "alg1" : "alg2"; }

enum class RunStatus { Converged, MaxIters, Stalled, NumericalFailure };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxIters: return "max_iters";
    case RunStatus::Stalled: return "stalled";
    case RunStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct TraceRow {
  std::size_t k = 0;
  double L_c = 0.0;
  double residual_l1sq = 0.0;
  double dp2 = 0.0;   // ||p^{k} - p^{k-1}||_2
  double dq2 = 0.0;   // ||q^{k} - q^{k-1}||_2
  double dBq2 = 0.0;  // ||B (q^{k} - q^{k-1})||_2
  double dnu2 = 0.0;  // ||nu^{k} - nu^{k-1}||_2
  double i_xz = std::nan("");
  double i_yz = std::nan("");
  double dAp2 = std::nan("");  // ||A (p^{k} - p^{k-1})||_2; not serialized
};

struct Trace {
  std::vector<TraceRow> rows;
  RunStatus status = RunStatus::MaxIters;
};

struct StopConfig {
  double tol = 2e-6;  // on ||A p - B q||_1^2
  std::size_t max_iters = 20000;
};

struct RunOptions {
  InnerConfig inner;
  StopConfig stop;
  bool record_info = true;       // I(X;Z), I(Y;Z) per row (needs a joint)
  std::size_t stall_window = 100;  // consecutive fully-stalled iterations before giving up
};

struct RunResult {
  BlockState state;
  Trace trace;
};

/// nu - (1 - alpha) c r.
inline std::vector<double> dual_relaxation_step(std::span<const double> nu, double c, double alpha,
                                                std::span<const double> r) {
  std::vector<double> out(nu.size());
  const double s = (1.0 - alpha) * c;
  for (std::size_t i = 0; i < nu.size(); ++i) out[i] = nu[i] - s * r[i];
  return out;
}

/// nu_half + c r.
inline std::vector<double> dual_ascent_step(std::span<const double> nu_half, double c,
                                            std::span<const double> r) {
  std::vector<double> out(nu_half.size());
  for (std::size_t i = 0; i < nu_half.size(); ++i) out[i] = nu_half[i] + c * r[i];
  return out;
}

inline void validate_run_config(const SplitProblem& pr, Variant variant) {
  if (!(pr.c > 0.0)) throw ConfigError("penalty coefficient c must be > 0");
  if (variant == Variant::Alg1 && !(pr.alpha > 0.0 && pr.alpha <= 2.0))
    throw ConfigError("Alg1 requires 0 < alpha <= 2");
  if (variant == Variant::Alg2 && !(pr.alpha > 0.0 && pr.alpha < 2.0))
    throw ConfigError("Alg2 requires 0 < alpha < 2");
}

/// Random starting point: every simplex column of both blocks drawn uniformly
/// from the simplex, floored at eps_floor; nu = 0.
inline BlockState random_init(const SplitProblem& pr, std::uint64_t seed) {
  CounterRng rng(seed);
  BlockState s;
  auto fill = [&](const BlockLayout& layout, std::vector<double>& v) {
    v.assign(layout_dim(layout), 0.0);
    for (const auto& seg : layout) {
      std::vector<double> col(seg.n_out);
      for (std::size_t j = 0; j < seg.n_in; ++j) {
        col = rng.simplex(seg.n_out);
        detail::floor_column(col, pr.eps_floor);
        for (std::size_t i = 0; i < seg.n_out; ++i) v[seg.index(i, j)] = col[i];
      }
    }
  };
  fill(pr.p_layout, s.p);
  fill(pr.q_layout, s.q);
  s.nu.assign(pr.nu_dim(), 0.0);
  return s;
}

namespace detail {

inline double diff_norm(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double op_diff_norm(const StructuredOperator& op, std::span<const double> a,
                           std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return std::sqrt(norm2sq(op.apply(d)));
}

inline void fill_info(const SplitProblem& pr, const BlockState& s, TraceRow& row) {
  const auto pt = info_plane_point(encoder_of(pr, s), *pr.joint);
  row.i_xz = pt.i_xz;
  row.i_yz = pt.i_yz;
}

}  // namespace detail

inline RunResult run(const SplitProblem& pr, Variant variant, const BlockState& init,
                     const RunOptions& opt = {}) {
  pr.validate();
  validate_run_config(pr, variant);
  opt.inner.validate();
  if (!(opt.stop.tol > 0.0)) throw ConfigError("stop tolerance must be > 0");
  check_state(pr, init);
  for (const auto* v : {&init.p, &init.q})
    for (double x : *v)
      if (!(x >= pr.eps_floor)) throw NumericalDomainError("initial state is not floored");

  const bool info = opt.record_info && pr.joint != nullptr;
  RunResult out;
  out.state = init;
  BlockState& s = out.state;

  TraceRow row0;
  row0.L_c = eval(pr, s);
  row0.residual_l1sq = primal_residual(pr, s).l1sq;
  row0.dAp2 = 0.0;
  if (info) detail::fill_info(pr, s, row0);
  out.trace.rows.push_back(row0);
  if (!std::isfinite(row0.L_c)) {
    out.trace.status = RunStatus::NumericalFailure;
    return out;
  }

  std::size_t stalled_run = 0;
  for (std::size_t k = 1; k <= opt.stop.max_iters; ++k) {
    const BlockState prev = s;
    bool stall_p = false, stall_q = false;

    if (variant == Variant::Alg1) {
      const auto r0 = constraint_residual(pr, s.p, s.q);
      s.nu = dual_relaxation_step(s.nu, pr.c, pr.alpha, r0);
      auto pstep = block_minimize(pr, s, Block::P, opt.inner);
      s.p = std::move(pstep.block);
      stall_p = pstep.stalled;
      const auto r1 = constraint_residual(pr, s.p, s.q);
      s.nu = dual_ascent_step(s.nu, pr.c, r1);
      auto qstep = block_minimize(pr, s, Block::Q, opt.inner);
      s.q = std::move(qstep.block);
      stall_q = qstep.stalled;
    } else {
      auto pstep = block_minimize(pr, s, Block::P, opt.inner);
      s.p = std::move(pstep.block);
      stall_p = pstep.stalled;
      const auto r1 = constraint_residual(pr, s.p, s.q);
      s.nu = dual_relaxation_step(s.nu, pr.c, pr.alpha, r1);
      auto qstep = block_minimize(pr, s, Block::Q, opt.inner);
      s.q = std::move(qstep.block);
      stall_q = qstep.stalled;
      const auto r2 = constraint_residual(pr, s.p, s.q);
      s.nu = dual_ascent_step(s.nu, pr.c, r2);
    }

    TraceRow row;
    row.k = k;
    row.L_c = eval(pr, s);
    row.residual_l1sq = primal_residual(pr, s).l1sq;
    row.dp2 = detail::diff_norm(s.p, prev.p);
    row.dq2 = detail::diff_norm(s.q, prev.q);
    row.dBq2 = detail::op_diff_norm(pr.B, s.q, prev.q);
    row.dAp2 = detail::op_diff_norm(pr.A, s.p, prev.p);
    row.dnu2 = detail::diff_norm(s.nu, prev.nu);
    if (info) detail::fill_info(pr, s, row);
    out.trace.rows.push_back(row);

    if (!std::isfinite(row.L_c)) {
      out.trace.status = RunStatus::NumericalFailure;
      return out;
    }
    if (row.residual_l1sq < opt.stop.tol) {
      out.trace.status = RunStatus::Converged;
      return out;
    }
    stalled_run = (stall_p && stall_q) ? stalled_run + 1 : 0;
    if (opt.stall_window > 0 && stalled_run >= opt.stall_window) {
      out.trace.status = RunStatus::Stalled;
      return out;
    }
  }
  out.trace.status = RunStatus::MaxIters;
  return out;
}

}  // namespace ibpf
