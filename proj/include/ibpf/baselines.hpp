#pragma once

// Reference solvers for the information plane: the self-consistent
// Blahut-Arimoto iteration for IB and the greedy merge-two clustering for PF.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "ibpf/error.hpp"
#include "ibpf/plane.hpp"
#include "ibpf/prob.hpp"
#include "ibpf/rng.hpp"

namespace ibpf {

struct BaConfig {
  double tol = 1e-10;  // max-norm change of p(z|x)
  std::size_t max_iters = 100000;
  double floor = 1e-15;  // applied to p(y|z) inside the KL divergence
};

struct BaResult {
  CondProbVector encoder;  // p(z|x)
  PlanePoint point;
  double objective = 0.0;  // gamma I(X;Z) - I(Y;Z), bits
  std::size_t iters = 0;
  bool converged = false;
};

namespace detail {

// One self-consistent update p(z|x) <- p(z) 2^{-(1/gamma) KL(p(y|x) || p(y|z))} / norm.
inline std::vector<double> ba_update(const std::vector<double>& enc, const JointPMF& j,
                                     std::size_t nz, double gamma, double floor) {
  const std::size_t nx = j.nx, ny = j.ny;
  std::vector<double> pz(nz, 0.0);
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t x = 0; x < nx; ++x) pz[z] += enc[z * nx + x] * j.p_x[x];

  // p(y|z) = sum_x p(y|x) p(z|x) p(x) / p(z)
  std::vector<double> pyz(nz * ny, 0.0);
  for (std::size_t z = 0; z < nz; ++z) {
    for (std::size_t y = 0; y < ny; ++y) {
      double s = 0.0;
      for (std::size_t x = 0; x < nx; ++x) s += j.y_given_x.at(y, x) * enc[z * nx + x] * j.p_x[x];
      pyz[z * ny + y] = pz[z] > 0.0 ? std::max(s / pz[z], floor) : j.p_y[y];
    }
  }

  std::vector<double> out(nz * nx);
  std::vector<double> logw(nz);
  for (std::size_t x = 0; x < nx; ++x) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < nz; ++z) {
      if (pz[z] <= 0.0) {
        logw[z] = -std::numeric_limits<double>::infinity();
        continue;
      }
      double kl = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        const double a = j.y_given_x.at(y, x);
        if (a > 0.0) kl += a * std::log2(a / pyz[z * ny + y]);
      }
      logw[z] = std::log2(pz[z]) - kl / gamma;
      hi = std::max(hi, logw[z]);
    }
    double s = 0.0;
    for (std::size_t z = 0; z < nz; ++z) {
      const double w = std::isfinite(logw[z]) ? std::exp2(logw[z] - hi) : 0.0;
      out[z * nx + x] = w;
      s += w;
    }
    for (std::size_t z = 0; z < nz; ++z) out[z * nx + x] /= s;
  }
  return out;
}

}  // namespace detail

/// Blahut-Arimoto IB iteration from a given encoder.
inline BaResult ba_ib_from(double gamma, const JointPMF& joint, const CondProbVector& init,
                           const BaConfig& cfg = {}) {
  if (!(gamma > 0.0)) throw ConfigError("ba_ib: gamma must be > 0");
  if (init.n_in() != joint.nx) throw ShapeError("ba_ib: encoder inputs != |X|");
  if (!(cfg.tol > 0.0)) throw ConfigError("ba_ib: tol must be > 0");
  const std::size_t nz = init.n_out();
  std::vector<double> enc = init.vec();
  BaResult res;
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    auto next = detail::ba_update(enc, joint, nz, gamma, cfg.floor);
    double change = 0.0;
    for (std::size_t i = 0; i < enc.size(); ++i) change = std::max(change, std::abs(next[i] - enc[i]));
    enc.swap(next);
    res.iters = it;
    if (change < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  res.encoder = CondProbVector(nz, joint.nx, std::move(enc));
  res.point = info_plane_point(res.encoder, joint);
  res.objective = gamma * res.point.i_xz - res.point.i_yz;
  return res;
}

/// Blahut-Arimoto IB from a random encoder (columns uniform on the simplex).
inline BaResult ba_ib(double gamma, const JointPMF& joint, std::size_t nz, std::uint64_t seed,
                      const BaConfig& cfg = {}) {
  if (nz < 1) throw ConfigError("ba_ib: |Z| must be >= 1");
  CounterRng rng(seed);
  std::vector<double> enc(nz * joint.nx);
  for (std::size_t x = 0; x < joint.nx; ++x) {
    const auto col = rng.simplex(nz);
    for (std::size_t z = 0; z < nz; ++z) enc[z * joint.nx + x] = col[z];
  }
  return ba_ib_from(gamma, joint, CondProbVector(nz, joint.nx, std::move(enc)), cfg);
}

/// Best (lowest objective) of `restarts` BA runs with seeds derived from `seed`.
inline BaResult ba_ib_best(double gamma, const JointPMF& joint, std::size_t nz,
                           std::size_t restarts, std::uint64_t seed, const BaConfig& cfg = {}) {
  if (restarts == 0) throw ConfigError("ba_ib_best: restarts must be >= 1");
  BaResult best;
  bool have = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    auto res = ba_ib(gamma, joint, nz, derive_seed(seed, r), cfg);
    if (!have || res.objective < best.objective) {
      best = std::move(res);
      have = true;
    }
  }
  return best;
}

struct MergeStep {
  std::vector<std::vector<std::size_t>> clusters;  // cluster -> members of X
  CondProbVector encoder;                          // deterministic p(z|x)
  PlanePoint point;
};

/// Deterministic encoder assigning each x to the cluster containing it.
inline CondProbVector partition_encoder(const std::vector<std::vector<std::size_t>>& clusters,
                                        std::size_t nx) {
  std::vector<double> w(clusters.size() * nx, 0.0);
  for (std::size_t z = 0; z < clusters.size(); ++z)
    for (std::size_t x : clusters[z]) w[z * nx + x] = 1.0;
  return CondProbVector(clusters.size(), nx, std::move(w));
}

/// Greedy agglomeration from Z = X down to a single cluster. Each step merges
/// the pair of clusters whose merge leaves I(Z;Y) smallest; ties go to the
/// lexicographically lowest pair. Returns one entry per |Z| = |X|, ..., 1.
inline std::vector<MergeStep> greedy_pf_merge_two(const JointPMF& joint) {
  const std::size_t nx = joint.nx;
  std::vector<std::vector<std::size_t>> clusters(nx);
  for (std::size_t x = 0; x < nx; ++x) clusters[x] = {x};

  std::vector<MergeStep> out;
  auto record = [&] {
    MergeStep s;
    s.clusters = clusters;
    s.encoder = partition_encoder(clusters, nx);
    s.point = info_plane_point(s.encoder, joint);
    out.push_back(std::move(s));
  };
  record();

  while (clusters.size() > 1) {
    std::size_t best_a = 0, best_b = 1;
    double best_iyz = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        auto trial = clusters;
        trial[a].insert(trial[a].end(), trial[b].begin(), trial[b].end());
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(b));
        const double iyz = info_plane_point(partition_encoder(trial, nx), joint).i_yz;
        if (iyz < best_iyz - 1e-12) {
          best_iyz = iyz;
          best_a = a;
          best_b = b;
        }
      }
    }
    clusters[best_a].insert(clusters[best_a].end(), clusters[best_b].begin(), clusters[best_b].end());
    std::sort(clusters[best_a].begin(), clusters[best_a].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_b));
    record();
  }
  return out;
}

}  // namespace ibpf
