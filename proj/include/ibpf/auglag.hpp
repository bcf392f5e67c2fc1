#pragma once

// Augmented Lagrangian
//   L_c(p, q, nu) = F(p) + G(q) + <nu, A p - B q> + (c/2) ||A p - B q||^2
// with F and G weighted sums of (conditional) entropy terms, in bits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibpf/error.hpp"
#include "ibpf/operators.hpp"
#include "ibpf/prob.hpp"

namespace ibpf {

enum class Block { P, Q };

enum class Formulation { IbTh, IbMv, Pf, Custom };

inline const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::IbTh: return "ib-th";
    case Formulation::IbMv: return "ib-mv";
    case Formulation::Pf: return "pf";
    case Formulation::Custom: return "custom";
  }
  return "?";
}

/// One compound simplex inside a block: n_in columns of n_out masses each,
/// out-major, starting at `offset`.
struct SimplexSegment {
  std::size_t offset = 0;
  std::size_t n_out = 0;
  std::size_t n_in = 1;

  std::size_t size() const { return n_out * n_in; }
  std::size_t index(std::size_t out, std::size_t in) const { return offset + out * n_in + in; }
};

using BlockLayout = std::vector<SimplexSegment>;

inline std::size_t layout_dim(const BlockLayout& layout) {
  std::size_t n = 0;
  for (const auto& s : layout) n += s.size();
  return n;
}

/// weight * H(.) of a slice of a block, optionally seen through a linear map
/// (e.g. H(Z|Y) evaluated on Q_{x|y} p_{z|x}).
struct EntropyTerm {
  enum class Kind { Marginal, Conditional };

  double weight = 0.0;
  Kind kind = Kind::Marginal;
  std::vector<double> prior;  // Conditional only: mass of each input column
  std::size_t offset = 0;
  std::size_t length = 0;
  std::optional<StructuredOperator> transform;
  std::string label;

  static EntropyTerm marginal(double weight, std::size_t offset, std::size_t length,
                              std::string label = "H(Z)") {
    EntropyTerm t;
    t.weight = weight;
    t.kind = Kind::Marginal;
    t.offset = offset;
    t.length = length;
    t.label = std::move(label);
    return t;
  }

  static EntropyTerm conditional(double weight, const ProbVector& prior, std::size_t offset,
                                 std::size_t length, std::string label) {
    EntropyTerm t;
    t.weight = weight;
    t.kind = Kind::Conditional;
    t.prior = prior.vec();
    t.offset = offset;
    t.length = length;
    t.label = std::move(label);
    return t;
  }

  EntropyTerm through(StructuredOperator op) && {
    transform = std::move(op);
    return std::move(*this);
  }

  std::size_t argument_dim() const { return transform ? transform->output_dim() : length; }
};

struct SplitProblem {
  std::vector<EntropyTerm> f_terms;
  std::vector<EntropyTerm> g_terms;
  StructuredOperator A;
  StructuredOperator B;
  double c = 1.0;
  double alpha = 1.0;
  BlockLayout p_layout;
  BlockLayout q_layout;
  double eps_floor = 1e-12;

  Formulation formulation = Formulation::Custom;
  double tradeoff = 0.0;  // gamma (IB) or beta (PF)
  std::size_t nz = 0;
  std::shared_ptr<const JointPMF> joint;
  Block encoder_block = Block::Q;  // which block holds p(z|x)
  std::size_t encoder_offset = 0;
  std::vector<std::string> warnings;

  std::size_t p_dim() const { return layout_dim(p_layout); }
  std::size_t q_dim() const { return layout_dim(q_layout); }
  std::size_t nu_dim() const { return A.output_dim(); }

  const BlockLayout& layout(Block b) const { return b == Block::P ? p_layout : q_layout; }
  const std::vector<EntropyTerm>& terms(Block b) const { return b == Block::P ? f_terms : g_terms; }

  void validate() const {
    if (A.input_dim() != p_dim()) throw ShapeError("SplitProblem: A.input_dim != dim(p)");
    if (B.input_dim() != q_dim()) throw ShapeError("SplitProblem: B.input_dim != dim(q)");
    if (A.output_dim() != B.output_dim()) throw ShapeError("SplitProblem: A, B output dims differ");
    check_terms(f_terms, p_dim(), "F");
    check_terms(g_terms, q_dim(), "G");
  }

 private:
  static void check_terms(const std::vector<EntropyTerm>& terms, std::size_t dim, const char* name) {
    std::vector<std::pair<std::size_t, std::size_t>> slices;
    for (const auto& t : terms) {
      if (t.offset + t.length > dim) throw ShapeError(std::string(name) + ": term slice out of range");
      if (t.transform && t.transform->input_dim() != t.length)
        throw ShapeError(std::string(name) + ": term transform input dim != slice length");
      if (t.kind == EntropyTerm::Kind::Conditional && t.argument_dim() % t.prior.size() != 0)
        throw ShapeError(std::string(name) + ": conditional term argument not divisible by prior");
      slices.emplace_back(t.offset, t.length);
    }
    std::sort(slices.begin(), slices.end());
    slices.erase(std::unique(slices.begin(), slices.end()), slices.end());
    std::size_t pos = 0;
    for (const auto& [off, len] : slices) {
      if (off != pos) throw ShapeError(std::string(name) + ": term slices overlap or leave a gap");
      pos = off + len;
    }
    if (!slices.empty() && pos != dim) throw ShapeError(std::string(name) + ": term slices leave a gap");
  }
};

struct BlockState {
  std::vector<double> p;
  std::vector<double> q;
  std::vector<double> nu;

  std::vector<double>& block(Block b) { return b == Block::P ? p : q; }
  const std::vector<double>& block(Block b) const { return b == Block::P ? p : q; }
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2sq(std::span<const double> a) { return dot(a, a); }

inline std::vector<double> term_argument(const EntropyTerm& t, std::span<const double> block) {
  auto slice = block.subspan(t.offset, t.length);
  if (t.transform) return t.transform->apply(slice);
  return {slice.begin(), slice.end()};
}

inline double term_value(const EntropyTerm& t, std::span<const double> block) {
  const auto u = term_argument(t, block);
  if (t.kind == EntropyTerm::Kind::Marginal) return t.weight * neg_sum_wlogw(u);
  const std::size_t n_in = t.prior.size();
  const std::size_t n_out = u.size() / n_in;
  double h = 0.0;
  for (std::size_t j = 0; j < n_in; ++j) {
    double hj = 0.0;
    for (std::size_t i = 0; i < n_out; ++i) {
      const double w = u[i * n_in + j];
      if (w > 0.0) hj -= w * std::log2(w);
    }
    h += t.prior[j] * hj;
  }
  return t.weight * h;
}

// Adds the gradient of one term to `grad` (length of the whole block).
inline void add_term_gradient(const EntropyTerm& t, std::span<const double> block, double floor,
                              std::span<double> grad) {
  const auto u = term_argument(t, block);
  std::vector<double> g(u.size());
  const std::size_t n_in = t.kind == EntropyTerm::Kind::Conditional ? t.prior.size() : 1;
  for (std::size_t k = 0; k < u.size(); ++k) {
    // Mixtures of floored masses can land a rounding error below the floor.
    if (!(u[k] >= floor * (1.0 - 1e-9))) {
      throw NumericalDomainError("gradient of " + t.label + ": mass " + std::to_string(u[k]) +
                                 " below floor " + std::to_string(floor));
    }
    const double mass = t.kind == EntropyTerm::Kind::Conditional ? t.prior[k % n_in] : 1.0;
    g[k] = -t.weight * mass * (std::log2(u[k]) + kLog2e);
  }
  if (t.transform) g = t.transform->apply_transpose(g);
  for (std::size_t k = 0; k < t.length; ++k) grad[t.offset + k] += g[k];
}

}  // namespace detail

/// Sum of the entropy terms of one block.
inline double terms_value(const std::vector<EntropyTerm>& terms, std::span<const double> block) {
  double v = 0.0;
  for (const auto& t : terms) v += detail::term_value(t, block);
  return v;
}

inline std::vector<double> terms_gradient(const std::vector<EntropyTerm>& terms,
                                          std::span<const double> block, double floor) {
  std::vector<double> g(block.size(), 0.0);
  for (const auto& t : terms) detail::add_term_gradient(t, block, floor, g);
  return g;
}

struct Residual {
  std::vector<double> r;  // A p - B q
  double l1sq = 0.0;      // ||r||_1^2
};

inline void check_state(const SplitProblem& pr, const BlockState& s) {
  if (s.p.size() != pr.p_dim() || s.q.size() != pr.q_dim() || s.nu.size() != pr.nu_dim()) {
    throw ShapeError("state dims (" + std::to_string(s.p.size()) + ", " + std::to_string(s.q.size()) +
                     ", " + std::to_string(s.nu.size()) + ") do not match problem (" +
                     std::to_string(pr.p_dim()) + ", " + std::to_string(pr.q_dim()) + ", " +
                     std::to_string(pr.nu_dim()) + ")");
  }
}

inline std::vector<double> constraint_residual(const SplitProblem& pr, std::span<const double> p,
                                               std::span<const double> q) {
  auto r = pr.A.apply(p);
  const auto bq = pr.B.apply(q);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= bq[i];
  return r;
}

inline Residual primal_residual(const SplitProblem& pr, const BlockState& s) {
  check_state(pr, s);
  Residual out;
  out.r = constraint_residual(pr, s.p, s.q);
  double l1 = 0.0;
  for (double v : out.r) l1 += std::abs(v);
  out.l1sq = l1 * l1;
  return out;
}

/// L_c at explicit (p, q, nu), no dimension checks.
inline double eval_at(const SplitProblem& pr, std::span<const double> p, std::span<const double> q,
                      std::span<const double> nu) {
  const auto r = constraint_residual(pr, p, q);
  return terms_value(pr.f_terms, p) + terms_value(pr.g_terms, q) + detail::dot(nu, r) +
         0.5 * pr.c * detail::norm2sq(r);
}

inline double eval(const SplitProblem& pr, const BlockState& s) {
  check_state(pr, s);
  return eval_at(pr, s.p, s.q, s.nu);
}

/// grad F(p) + A^T nu + c A^T (A p - B q).
inline std::vector<double> grad_p(const SplitProblem& pr, const BlockState& s) {
  check_state(pr, s);
  auto g = terms_gradient(pr.f_terms, s.p, pr.eps_floor);
  auto r = constraint_residual(pr, s.p, s.q);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = s.nu[i] + pr.c * r[i];
  const auto at = pr.A.apply_transpose(r);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += at[i];
  return g;
}

/// grad G(q) - B^T nu - c B^T (A p - B q).
inline std::vector<double> grad_q(const SplitProblem& pr, const BlockState& s) {
  check_state(pr, s);
  auto g = terms_gradient(pr.g_terms, s.q, pr.eps_floor);
  auto r = constraint_residual(pr, s.p, s.q);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = s.nu[i] + pr.c * r[i];
  const auto bt = pr.B.apply_transpose(r);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= bt[i];
  return g;
}

inline std::vector<double> grad_block(const SplitProblem& pr, const BlockState& s, Block b) {
  return b == Block::P ? grad_p(pr, s) : grad_q(pr, s);
}

/// Removes the per-column mean of `g` over each simplex column of the layout,
/// i.e. projects onto the tangent space of the compound simplex.
inline std::vector<double> tangent_projection(const BlockLayout& layout, std::span<const double> g) {
  std::vector<double> out(g.begin(), g.end());
  for (const auto& seg : layout) {
    for (std::size_t j = 0; j < seg.n_in; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < seg.n_out; ++i) mean += out[seg.index(i, j)];
      mean /= static_cast<double>(seg.n_out);
      for (std::size_t i = 0; i < seg.n_out; ++i) out[seg.index(i, j)] -= mean;
    }
  }
  return out;
}

}  // namespace ibpf
