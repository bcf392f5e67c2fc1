#pragma once

// Reference computations written directly from definitions, used as oracles.

#include <cmath>
#include <cstddef>
#include <vector>

#include "ibpf/ibpf.hpp"

namespace oracle {

// p(y|x) columns of the 3x3 example instance, x uniform.
inline std::vector<std::vector<double>> example_table() {
  const double pyx[3][3] = {{0.90, 0.025, 0.075}, {0.08, 0.82, 0.10}, {0.40, 0.05, 0.55}};
  std::vector<std::vector<double>> t(3, std::vector<double>(3));
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) t[x][y] = pyx[x][y] / 3.0;
  return t;
}

inline ibpf::JointPMF example_joint() { return ibpf::build_joint(example_table()); }

inline std::vector<double> rand_simplex(ibpf::CounterRng& rng, std::size_t n) {
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& v : w) {
    v = rng.uniform() + 1e-3;
    s += v;
  }
  for (auto& v : w) v /= s;
  return w;
}

inline ibpf::JointPMF random_joint(ibpf::CounterRng& rng, std::size_t nx, std::size_t ny) {
  const auto flat = rand_simplex(rng, nx * ny);
  return ibpf::build_joint(nx, ny, flat);
}

// z-major encoder p(z|x) with every column drawn independently.
inline ibpf::CondProbVector random_encoder(ibpf::CounterRng& rng, std::size_t nz, std::size_t nx) {
  std::vector<double> w(nz * nx);
  for (std::size_t x = 0; x < nx; ++x) {
    const auto col = rand_simplex(rng, nz);
    for (std::size_t z = 0; z < nz; ++z) w[z * nx + x] = col[z];
  }
  return ibpf::CondProbVector(nz, nx, w);
}

// I between rows and columns of a 2D table given as table[a][b], bits.
inline double mi_table(const std::vector<std::vector<double>>& t) {
  double tot = 0.0;
  for (const auto& r : t)
    for (double v : r) tot += v;
  std::vector<double> pa(t.size(), 0.0), pb(t[0].size(), 0.0);
  for (std::size_t a = 0; a < t.size(); ++a)
    for (std::size_t b = 0; b < t[a].size(); ++b) {
      pa[a] += t[a][b] / tot;
      pb[b] += t[a][b] / tot;
    }
  double mi = 0.0;
  for (std::size_t a = 0; a < t.size(); ++a)
    for (std::size_t b = 0; b < t[a].size(); ++b) {
      const double p = t[a][b] / tot;
      if (p > 0.0) mi += p * std::log2(p / (pa[a] * pb[b]));
    }
  return mi;
}

inline std::vector<std::vector<double>> joint_rows(const ibpf::JointPMF& j) {
  std::vector<std::vector<double>> t(j.nx, std::vector<double>(j.ny));
  for (std::size_t x = 0; x < j.nx; ++x)
    for (std::size_t y = 0; y < j.ny; ++y) t[x][y] = j.at(x, y);
  return t;
}

struct Plane {
  double i_xz, i_yz;
};

// I(X;Z) and I(Y;Z) from the triple p(x,y,z) = p(x,y) p(z|x).
inline Plane plane(const ibpf::CondProbVector& enc, const ibpf::JointPMF& j) {
  const std::size_t nz = enc.n_out();
  std::vector<std::vector<double>> xz(j.nx, std::vector<double>(nz, 0.0));
  std::vector<std::vector<double>> yz(j.ny, std::vector<double>(nz, 0.0));
  for (std::size_t x = 0; x < j.nx; ++x)
    for (std::size_t y = 0; y < j.ny; ++y)
      for (std::size_t z = 0; z < nz; ++z) {
        const double p = j.at(x, y) * enc.at(z, x);
        xz[x][z] += p;
        yz[y][z] += p;
      }
  return {mi_table(xz), mi_table(yz)};
}

inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

// Random interior state of a problem: every simplex column well above the floor.
inline ibpf::BlockState interior_state(const ibpf::SplitProblem& pr, ibpf::CounterRng& rng,
                                       double nu_scale = 1.0) {
  ibpf::BlockState s;
  auto fill = [&](const ibpf::BlockLayout& layout, std::vector<double>& v) {
    v.assign(ibpf::layout_dim(layout), 0.0);
    for (const auto& seg : layout)
      for (std::size_t j = 0; j < seg.n_in; ++j) {
        const auto col = rand_simplex(rng, seg.n_out);
        for (std::size_t i = 0; i < seg.n_out; ++i) v[seg.index(i, j)] = 0.5 * col[i] + 0.5 / seg.n_out;
      }
  };
  fill(pr.p_layout, s.p);
  fill(pr.q_layout, s.q);
  s.nu.resize(pr.nu_dim());
  for (auto& v : s.nu) v = nu_scale * (2.0 * rng.uniform() - 1.0);
  return s;
}

// Feasible state built from an encoder: every block set to the marginal or
// conditional the encoder induces.
inline ibpf::BlockState feasible_state(const ibpf::SplitProblem& pr, const ibpf::CondProbVector& enc) {
  const auto& j = *pr.joint;
  const std::size_t nz = enc.n_out();
  std::vector<double> pz(nz, 0.0), pzy(nz * j.ny, 0.0);
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t x = 0; x < j.nx; ++x) {
      pz[z] += enc.at(z, x) * j.p_x[x];
      for (std::size_t y = 0; y < j.ny; ++y) pzy[z * j.ny + y] += enc.at(z, x) * j.at(x, y) / j.p_y[y];
    }
  ibpf::BlockState s;
  switch (pr.formulation) {
    case ibpf::Formulation::IbTh:
      s.p = pz;
      s.q = enc.vec();
      break;
    case ibpf::Formulation::IbMv:
      s.p = enc.vec();
      s.q = pz;
      s.q.insert(s.q.end(), pzy.begin(), pzy.end());
      break;
    case ibpf::Formulation::Pf:
      s.p = pzy;
      s.q = enc.vec();
      break;
    default: break;
  }
  s.nu.assign(pr.nu_dim(), 0.0);
  return s;
}

}  // namespace oracle
