#pragma once

// Post-hoc checks on solver traces: sufficient-decrease certificates, local
// linear-rate fits and convergence percentages.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ibpf/drs.hpp"
#include "ibpf/error.hpp"
#include "ibpf/formulations.hpp"
#include "ibpf/plane.hpp"

namespace ibpf {

/// Constants entering the per-iteration decrease bounds.
struct CertificateConstants {
  double sigma_F = 0.0;
  double L_p = 0.0;
  double omega_G = 0.0;  // Alg1
  double sigma_G = 0.0;  // Alg2
  double L_q = 0.0;      // Alg2, only for the certification flag
  double mu_A = 1.0;
  double mu_B = 1.0;
  double c = 1.0;
  double alpha = 1.0;

  static CertificateConstants from(const SmoothnessConstants& k, double c, double alpha) {
    CertificateConstants cc;
    cc.sigma_F = k.sigma_F;
    cc.L_p = k.L_p;
    cc.omega_G = k.omega_G;
    cc.sigma_G = k.sigma_G;
    cc.L_q = k.L_q;
    cc.mu_A = k.mu_A;
    cc.mu_B = k.mu_B;
    cc.c = c;
    cc.alpha = alpha;
    return cc;
  }
};

struct DecreaseCoefficients {
  double delta_p = 0.0;
  double delta_q = 0.0;
  double delta_nu = 0.0;
};

/// Alg1 coefficients in both placements of mu_A^2 that appear for them.
/// `lemma`: sigma_F L_p / (mu_A^2 (L_p+sigma_F)) + c (1/alpha - 1/2),  1/(mu_A^2 (L_p+sigma_F)) - 1/(c alpha)
/// `sketch`: sigma_F L_p / (L_p+sigma_F) + c mu_A^2 (1/alpha - 1/2),   mu_A^2/(L_p+sigma_F) - 1/(c alpha)
inline DecreaseCoefficients alg1_coefficients_lemma(const CertificateConstants& k) {
  const double m2 = k.mu_A * k.mu_A;
  return {k.sigma_F * k.L_p / (m2 * (k.L_p + k.sigma_F)) + k.c * (1.0 / k.alpha - 0.5),
          0.5 * (k.c - k.omega_G), 1.0 / (m2 * (k.L_p + k.sigma_F)) - 1.0 / (k.c * k.alpha)};
}

inline DecreaseCoefficients alg1_coefficients_sketch(const CertificateConstants& k) {
  const double m2 = k.mu_A * k.mu_A;
  return {k.sigma_F * k.L_p / (k.L_p + k.sigma_F) + k.c * m2 * (1.0 / k.alpha - 0.5),
          0.5 * (k.c - k.omega_G), m2 / (k.L_p + k.sigma_F) - 1.0 / (k.c * k.alpha)};
}

struct DecreaseReport {
  std::vector<std::size_t> violations;  // iteration indices k where the bound fails
  std::size_t checked = 0;
  double fraction_ok = 1.0;
  bool certified = false;  // all decrease coefficients nonnegative
  DecreaseCoefficients binding;  // Alg1: the smaller of each placement
  std::string note;
};

/// Checks L_c^{k} - L_c^{k+1} against the sufficient-decrease lower bound for
/// every k >= 1. The step out of the initial state is skipped: the bound
/// needs nu^k to satisfy the optimality condition of a previous q-update.
/// Inexact inner steps can violate the bound occasionally.
inline DecreaseReport sufficient_decrease_report(const Trace& trace, Variant variant,
                                                 const CertificateConstants& k) {
  if (!(k.c > 0.0) || !(k.alpha > 0.0)) throw ConfigError("sufficient_decrease_report: c, alpha must be > 0");
  DecreaseReport rep;
  bool missing_ap = false;
  if (variant == Variant::Alg1) {
    const auto a = alg1_coefficients_lemma(k), b = alg1_coefficients_sketch(k);
    rep.binding = {std::min(a.delta_p, b.delta_p), std::min(a.delta_q, b.delta_q),
                   std::min(a.delta_nu, b.delta_nu)};
    rep.certified = rep.binding.delta_p >= 0.0 && rep.binding.delta_q >= 0.0 && rep.binding.delta_nu >= 0.0;
  } else {
    // Coefficients of ||A dp||^2, ||dq||^2, ||B dq||^2, ||dnu||^2.
    rep.binding = {0.5 * k.c, -0.5 * k.sigma_G, -1.0 / (k.alpha * k.c)};
    rep.certified = k.alpha < 2.0 && k.c > thresholds::alg2_definite_b(k.sigma_G, k.L_q, k.mu_B, k.alpha);
  }

  for (std::size_t i = 2; i < trace.rows.size(); ++i) {
    const auto& prev = trace.rows[i - 1];
    const auto& row = trace.rows[i];
    for (double v : {row.dp2, row.dq2, row.dBq2, row.dnu2})
      if (!std::isfinite(v)) throw ConfigError("sufficient_decrease_report: trace row lacks displacement norms");
    const double decrease = prev.L_c - row.L_c;
    double bound = 0.0;
    if (variant == Variant::Alg1) {
      bound = rep.binding.delta_p * row.dp2 * row.dp2 + rep.binding.delta_q * row.dBq2 * row.dBq2 +
              rep.binding.delta_nu * row.dnu2 * row.dnu2;
    } else {
      double dap = row.dAp2;
      if (!std::isfinite(dap)) {
        dap = 0.0;
        missing_ap = true;
      }
      bound = 0.5 * k.c * dap * dap - 0.5 * k.sigma_G * row.dq2 * row.dq2 +
              k.c * (1.0 / k.alpha - 0.5) * row.dBq2 * row.dBq2 -
              row.dnu2 * row.dnu2 / (k.alpha * k.c);
    }
    ++rep.checked;
    const double slack = 1e-12 * std::max(1.0, std::abs(prev.L_c));
    if (decrease < bound - slack) rep.violations.push_back(row.k);
  }
  if (rep.checked > 0)
    rep.fraction_ok = 1.0 - static_cast<double>(rep.violations.size()) / static_cast<double>(rep.checked);
  if (!rep.certified) rep.note = "decrease coefficients not all nonnegative: configuration uncertified";
  if (missing_ap) {
    if (!rep.note.empty()) rep.note += "; ";
    rep.note += "||A dp|| unavailable, its term dropped";
  }
  return rep;
}

struct RateFit {
  bool ok = false;
  double Q = 0.0;      // per-iteration contraction of the gap L_c - L*
  double slope = 0.0;  // of log2(gap) against k
  double r2 = 0.0;
  std::size_t points = 0;
  std::string message;
};

/// Least-squares fit of log2(L_c^k - L_star) over the last `tail_fraction` of
/// the trace. The tail is cut at the first gap <= min_gap (numerically zero).
inline RateFit rate_fit(const Trace& trace, double L_star, double tail_fraction,
                        double min_gap = 1e-8) {
  RateFit fit;
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    fit.message = "tail_fraction must lie in (0, 1]";
    return fit;
  }
  const std::size_t n = trace.rows.size();
  const std::size_t len = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n))));
  std::vector<double> ks, ys;
  for (std::size_t i = n - std::min(len, n); i < n; ++i) {
    const double gap = trace.rows[i].L_c - L_star;
    if (!(gap > min_gap) || !std::isfinite(gap)) break;
    ks.push_back(static_cast<double>(trace.rows[i].k));
    ys.push_back(std::log2(gap));
  }
  fit.points = ks.size();
  if (ks.size() < 3) {
    fit.message = "fewer than 3 gaps above min_gap in the tail";
    return fit;
  }
  const double m = static_cast<double>(ks.size());
  double mk = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mk += ks[i];
    my += ys[i];
  }
  mk /= m;
  my /= m;
  double skk = 0.0, sky = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    skk += (ks[i] - mk) * (ks[i] - mk);
    sky += (ks[i] - mk) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (syy <= 1e-20 * m) {
    fit.message = "flat tail: gap does not change (numerical floor)";
    return fit;
  }
  fit.slope = sky / skk;
  const double intercept = my - fit.slope * mk;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double e = ys[i] - (intercept + fit.slope * ks[i]);
    ss_res += e * e;
  }
  fit.r2 = 1.0 - ss_res / syy;
  fit.Q = std::exp2(fit.slope);
  fit.ok = true;
  return fit;
}

inline double convergence_percentage(const std::vector<RunStatus>& statuses) {
  if (statuses.empty()) throw ConfigError("convergence_percentage: no runs");
  const auto n = std::count(statuses.begin(), statuses.end(), RunStatus::Converged);
  return static_cast<double>(n) / static_cast<double>(statuses.size());
}

}  // namespace ibpf
