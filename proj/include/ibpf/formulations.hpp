#pragma once

// Builders for the three split formulations and the advisory penalty
// thresholds that certify convergence of the splitting iterations.
//
//   ib-th  p = p_z,      q = p_{z|x},          A = I,            B = Q_x
//   ib-mv  p = p_{z|x},  q = [p_z; p_{z|y}],   A = [Q_x; Q_x|y], B = I
//   pf     p = p_{z|y},  q = p_{z|x},          A = I,            B = Q_x|y

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "ibpf/auglag.hpp"
#include "ibpf/drs.hpp"
#include "ibpf/error.hpp"
#include "ibpf/operators.hpp"
#include "ibpf/prob.hpp"

namespace ibpf {

namespace detail {

inline void check_nz(std::size_t nz) {
  if (nz < 2) throw ConfigError("|Z| must be >= 2, got " + std::to_string(nz));
}

inline void check_gamma(double gamma, SplitProblem& pr) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (gamma >= 1.0)
    pr.warnings.push_back("gamma >= 1: the IB minimizers are trivial (I(X;Z) = I(Y;Z) = 0)");
}

}  // namespace detail

/// IB with the Markov relation p_{z|y} = Q_{x|y} p_{z|x} held exactly inside G:
/// F = (gamma-1) H(Z), G = -gamma H(Z|X) + H(Z|Y).
inline SplitProblem build_ib_th(double gamma, const JointPMF& joint, std::size_t nz,
                                double c = 1.0, double alpha = 1.0) {
  detail::check_nz(nz);
  SplitProblem pr;
  detail::check_gamma(gamma, pr);
  const std::size_t nx = joint.nx;
  pr.formulation = Formulation::IbTh;
  pr.tradeoff = gamma;
  pr.nz = nz;
  pr.joint = std::make_shared<const JointPMF>(joint);
  pr.c = c;
  pr.alpha = alpha;
  pr.p_layout = {{0, nz, 1}};
  pr.q_layout = {{0, nz, nx}};
  pr.f_terms.push_back(EntropyTerm::marginal(gamma - 1.0, 0, nz));
  pr.g_terms.push_back(EntropyTerm::conditional(-gamma, joint.p_x, 0, nz * nx, "H(Z|X)"));
  pr.g_terms.push_back(EntropyTerm::conditional(1.0, joint.p_y, 0, nz * nx, "H(Z|Y)")
                           .through(StructuredOperator::markov_map(nz, joint.x_given_y)));
  pr.A = StructuredOperator::identity(nz);
  pr.B = StructuredOperator::marginal_map(nz, joint.p_x);
  pr.encoder_block = Block::Q;
  pr.validate();
  return pr;
}

/// IB with both consistency relations as penalties:
/// F = -gamma H(Z|X), G = (gamma-1) H(Z) + H(Z|Y) on q = [p_z; p_{z|y}].
inline SplitProblem build_ib_mv(double gamma, const JointPMF& joint, std::size_t nz,
                                double c = 1.0, double alpha = 1.0) {
  detail::check_nz(nz);
  SplitProblem pr;
  detail::check_gamma(gamma, pr);
  const std::size_t nx = joint.nx, ny = joint.ny;
  pr.formulation = Formulation::IbMv;
  pr.tradeoff = gamma;
  pr.nz = nz;
  pr.joint = std::make_shared<const JointPMF>(joint);
  pr.c = c;
  pr.alpha = alpha;
  pr.p_layout = {{0, nz, nx}};
  pr.q_layout = {{0, nz, 1}, {nz, nz, ny}};
  pr.f_terms.push_back(EntropyTerm::conditional(-gamma, joint.p_x, 0, nz * nx, "H(Z|X)"));
  pr.g_terms.push_back(EntropyTerm::marginal(gamma - 1.0, 0, nz));
  pr.g_terms.push_back(EntropyTerm::conditional(1.0, joint.p_y, nz, nz * ny, "H(Z|Y)"));
  pr.A = StructuredOperator::vstack({StructuredOperator::marginal_map(nz, joint.p_x),
                                     StructuredOperator::markov_map(nz, joint.x_given_y)});
  pr.B = StructuredOperator::identity(nz * (ny + 1));
  pr.encoder_block = Block::P;
  pr.validate();
  return pr;
}

/// Privacy funnel with the marginal relation p_z = Q_x p_{z|x} held inside G:
/// F = -beta H(Z|Y), G = (beta-1) H(Z) + H(Z|X). Solved with Alg2.
inline SplitProblem build_pf(double beta, const JointPMF& joint, std::size_t nz, double c = 1.0,
                             double alpha = 1.0) {
  detail::check_nz(nz);
  if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
  SplitProblem pr;
  if (beta <= 1.0) pr.warnings.push_back("beta <= 1: privacy funnel solutions are typically trivial");
  const std::size_t nx = joint.nx, ny = joint.ny;
  pr.formulation = Formulation::Pf;
  pr.tradeoff = beta;
  pr.nz = nz;
  pr.joint = std::make_shared<const JointPMF>(joint);
  pr.c = c;
  pr.alpha = alpha;
  pr.p_layout = {{0, nz, ny}};
  pr.q_layout = {{0, nz, nx}};
  pr.f_terms.push_back(EntropyTerm::conditional(-beta, joint.p_y, 0, nz * ny, "H(Z|Y)"));
  pr.g_terms.push_back(EntropyTerm::marginal(beta - 1.0, 0, nz * nx)
                           .through(StructuredOperator::marginal_map(nz, joint.p_x)));
  pr.g_terms.push_back(EntropyTerm::conditional(1.0, joint.p_x, 0, nz * nx, "H(Z|X)"));
  pr.A = StructuredOperator::identity(nz * ny);
  pr.B = StructuredOperator::markov_map(nz, joint.x_given_y);
  pr.encoder_block = Block::Q;
  pr.validate();
  return pr;
}

inline SplitProblem build_problem(Formulation f, double tradeoff, const JointPMF& joint,
                                  std::size_t nz, double c = 1.0, double alpha = 1.0) {
  switch (f) {
    case Formulation::IbTh: return build_ib_th(tradeoff, joint, nz, c, alpha);
    case Formulation::IbMv: return build_ib_mv(tradeoff, joint, nz, c, alpha);
    case Formulation::Pf: return build_pf(tradeoff, joint, nz, c, alpha);
    case Formulation::Custom: break;
  }
  throw ConfigError("build_problem: no builder for custom formulations");
}

/// The variant each formulation's convergence guarantee is stated for.
inline Variant natural_variant(Formulation f) {
  return f == Formulation::IbTh ? Variant::Alg1 : Variant::Alg2;
}

/// epsilon-infimality floors assumed for the iterates (modeling parameters,
/// unrelated to the solver's numerical floor).
struct SmoothnessProfile {
  double eps_z = 0.01;
  double eps_zx = 0.01;
  double eps_zy = 0.01;

  void validate() const {
    for (double e : {eps_z, eps_zx, eps_zy})
      if (!(e > 0.0 && e < 1.0)) throw ConfigError("profile floors must lie in (0, 1)");
  }
};

/// Smoothness / convexity constants of a formulation under a profile.
/// Entries a formulation does not use stay 0.
struct SmoothnessConstants {
  double L_p = 0.0;      // smoothness of F
  double L_q = 0.0;      // smoothness of G
  double sigma_F = 0.0;  // strong convexity of F
  double sigma_G = 0.0;  // weak convexity of G
  double omega_G = 0.0;  // restricted weak convexity of G w.r.t. B
  double M_q = 0.0;      // Lipschitz constant of G
  double mu_A = 1.0;     // smallest positive singular value of A
  double mu_B = 1.0;     // smallest positive singular value of B
  double lambda_B = 1.0; // largest singular value of B
  double mu_BBt = 1.0;   // smallest positive eigenvalue of B B^T
  std::vector<double> zeta_y;  // sup_x p(y|x) - inf_x p(y|x)
  double zeta = 0.0;           // sum_y zeta(y)^2 / p(y)
};

/// zeta(y) per y and zeta = sum_y zeta(y)^2 / p(y).
inline std::pair<std::vector<double>, double> channel_spread(const JointPMF& joint) {
  std::vector<double> zy(joint.ny);
  double z = 0.0;
  for (std::size_t y = 0; y < joint.ny; ++y) {
    double hi = 0.0, lo = 1.0;
    for (std::size_t x = 0; x < joint.nx; ++x) {
      hi = std::max(hi, joint.y_given_x.at(y, x));
      lo = std::min(lo, joint.y_given_x.at(y, x));
    }
    zy[y] = hi - lo;
    if (joint.p_y[y] > 0.0) z += zy[y] * zy[y] / joint.p_y[y];
  }
  return {zy, z};
}

inline SmoothnessConstants derive_constants(Formulation f, const JointPMF& joint, std::size_t nz,
                                            double tradeoff, const SmoothnessProfile& prof) {
  prof.validate();
  SmoothnessConstants k;
  const double Nz = static_cast<double>(nz);
  const double Nx = static_cast<double>(joint.nx);
  const double Ny = static_cast<double>(joint.ny);
  std::tie(k.zeta_y, k.zeta) = channel_spread(joint);
  switch (f) {
    case Formulation::IbTh: {
      const double gamma = tradeoff;
      k.sigma_F = 1.0 - gamma;
      k.L_p = 1.0 / prof.eps_z;
      k.L_q = 1.0 / prof.eps_zx;
      k.omega_G = 2.0 * Nz * Nx * k.zeta / prof.eps_z - gamma;
      const auto sb = spectral_bounds(StructuredOperator::marginal_map(nz, joint.p_x));
      k.mu_A = 1.0;
      k.mu_B = sb.min_singular;
      k.lambda_B = sb.max_singular;
      k.mu_BBt = sb.min_eig_op_opT;
      break;
    }
    case Formulation::IbMv: {
      k.sigma_F = 0.0;
      k.L_p = 1.0 / prof.eps_zx;
      k.sigma_G = 2.0 * Nz * Ny / prof.eps_zy;
      k.L_q = 1.0 / std::min(prof.eps_z, prof.eps_zy);
      const auto a = StructuredOperator::vstack({StructuredOperator::marginal_map(nz, joint.p_x),
                                                 StructuredOperator::markov_map(nz, joint.x_given_y)});
      k.mu_A = spectral_bounds(a).min_singular;
      break;
    }
    case Formulation::Pf: {
      const double beta = tradeoff;
      k.sigma_F = 0.0;
      k.L_p = 1.0 / prof.eps_zy;
      k.sigma_G = 2.0 * Nz * (std::abs(beta - 1.0) + Nx) / prof.eps_zx;
      k.L_q = 1.0 / prof.eps_zx;
      k.M_q = 2.0 * std::abs(std::log2(prof.eps_zx));
      const auto sb = spectral_bounds(StructuredOperator::markov_map(nz, joint.x_given_y));
      k.mu_B = sb.min_singular;
      k.lambda_B = sb.max_singular;
      k.mu_BBt = sb.min_eig_op_opT;
      break;
    }
    case Formulation::Custom:
      throw ConfigError("derive_constants: custom formulation");
  }
  return k;
}

// Generic rows of the convergence summary table, for arbitrary constants.
namespace thresholds {

inline void check_alpha_open(double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (alpha >= 2.0) throw ConfigError("alpha must be < 2 (denominator 4 - 2 alpha vanishes)");
}

enum class MuPlacement { Divide, Multiply };

/// Alg1, F strongly convex + smooth, G restricted weakly convex, A positive definite:
/// c > max{omega_G, (L_p + sigma_F) / (alpha mu_A^2)}. `Multiply` gives the
/// (L_p + sigma_F) mu_A^2 / alpha placement used by the sufficient-decrease assumption.
inline double alg1(double omega_G, double L_p, double sigma_F, double mu_A, double alpha,
                   MuPlacement placement = MuPlacement::Divide) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("Alg1 requires 0 < alpha <= 2");
  const double m2 = mu_A * mu_A;
  const double second =
      placement == MuPlacement::Divide ? (L_p + sigma_F) / (alpha * m2) : (L_p + sigma_F) * m2 / alpha;
  return std::max(omega_G, second);
}

/// Alg2, G weakly convex + smooth, B positive definite, A full row rank.
inline double alg2_definite_b(double sigma_G, double L_q, double mu_B, double alpha) {
  check_alpha_open(alpha);
  const double m2 = mu_B * mu_B;
  return (alpha * sigma_G + std::sqrt(alpha * alpha * sigma_G * sigma_G +
                                      8.0 * (2.0 - alpha) * L_q * L_q * m2 * m2)) /
         ((4.0 - 2.0 * alpha) * m2);
}

/// Alg2, G additionally M_q-Lipschitz, A positive definite, B full row rank.
/// with_Lq = false drops the L_q^2 factor under the square root (the form
/// printed in the general theorem); true matches the privacy-funnel instance.
inline double alg2_lipschitz(double sigma_G, double L_q, double M_q, double lambda_B, double mu_BBt,
                             double alpha, bool with_Lq = true) {
  check_alpha_open(alpha);
  const double lq2 = with_Lq ? L_q * L_q : 1.0;
  const double a = M_q * alpha * sigma_G;
  return M_q * (a + std::sqrt(a * a + 8.0 * (2.0 - alpha) * lq2 * lambda_B * lambda_B * mu_BBt)) /
         (4.0 - 2.0 * alpha);
}

/// Proximal ADMM baseline row (alpha = 1, both A and B positive definite).
inline double prox_admm(double sigma_G, double L_q, double mu_B) {
  return (sigma_G + std::sqrt(sigma_G * sigma_G + 8.0 * L_q * L_q)) / (2.0 * mu_B * mu_B);
}

}  // namespace thresholds

/// Smallest penalty coefficient covered by the convergence guarantee of a
/// formulation. Advisory only: solvers accept any c > 0.
inline double penalty_threshold(Formulation f, double alpha, const SmoothnessProfile& prof,
                                std::size_t nz, std::size_t nx, std::size_t ny, double tradeoff,
                                double lambda_B = 1.0, double mu_BBt = 1.0) {
  prof.validate();
  const double Nz = static_cast<double>(nz), Nx = static_cast<double>(nx), Ny = static_cast<double>(ny);
  switch (f) {
    case Formulation::IbTh: {
      if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("ib-th requires 0 < alpha <= 2");
      const double gamma = tradeoff;
      return std::max(2.0 * Nz * Nx / prof.eps_zx, (1.0 / prof.eps_z + (1.0 - gamma)) / alpha);
    }
    case Formulation::IbMv: {
      const double sigma_G = 2.0 * Nz * Ny / prof.eps_zy;
      const double L_q = 1.0 / std::min(prof.eps_z, prof.eps_zy);
      return thresholds::alg2_definite_b(sigma_G, L_q, 1.0, alpha);
    }
    case Formulation::Pf: {
      const double beta = tradeoff;
      const double sigma_G = 2.0 * Nz * (std::abs(beta - 1.0) + Nx) / prof.eps_zx;
      const double L_q = 1.0 / prof.eps_zx;
      const double M_q = 2.0 * std::abs(std::log2(prof.eps_zx));
      return thresholds::alg2_lipschitz(sigma_G, L_q, M_q, lambda_B, mu_BBt, alpha, true);
    }
    case Formulation::Custom: break;
  }
  throw ConfigError("penalty_threshold: custom formulation");
}

/// Same, reading dimensions and the spectrum of B from a joint.
inline double penalty_threshold(Formulation f, double alpha, const SmoothnessProfile& prof,
                                const JointPMF& joint, std::size_t nz, double tradeoff) {
  double lambda_B = 1.0, mu_BBt = 1.0;
  if (f == Formulation::Pf) {
    const auto sb = spectral_bounds(StructuredOperator::markov_map(nz, joint.x_given_y));
    lambda_B = sb.max_singular;
    mu_BBt = sb.min_eig_op_opT;
  }
  return penalty_threshold(f, alpha, prof, nz, joint.nx, joint.ny, tradeoff, lambda_B, mu_BBt);
}

}  // namespace ibpf
