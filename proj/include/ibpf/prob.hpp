#pragma once

// Discrete probability primitives. Every logarithm is base 2, so entropies and
// mutual informations are in bits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ibpf/error.hpp"

namespace ibpf {

inline constexpr double kNormTol = 1e-12;
inline constexpr double kLog2e = 1.4426950408889634074;  // log2(e) = 1/ln 2

namespace detail {

inline void check_masses(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0) || !std::isfinite(v[i])) {
      throw InvalidDistribution(std::string(what) + ": entry " + std::to_string(i) +
                                " is negative or non-finite");
    }
  }
}

// -sum w log2 w with 0 log 0 = 0, no validation.
inline double neg_sum_wlogw(std::span<const double> w) {
  double h = 0.0;
  for (double x : w) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

}  // namespace detail

/// A probability mass function over N outcomes.
class ProbVector {
 public:
  ProbVector() = default;

  /// Validates and silently renormalizes sums within kNormTol of 1.
  explicit ProbVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InvalidDistribution("ProbVector: empty");
    detail::check_masses(values_, "ProbVector");
    const double s = std::accumulate(values_.begin(), values_.end(), 0.0);
    if (std::abs(s - 1.0) > kNormTol) {
      throw InvalidDistribution("ProbVector: masses sum to " + std::to_string(s));
    }
    for (double& v : values_) v /= s;
  }

  static ProbVector uniform(std::size_t n) {
    if (n == 0) throw InvalidDistribution("ProbVector: empty");
    return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vec() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Conditional pmf p(out | in), stored out-major: entry (i, j) lives at
/// i * n_in + j and holds p(out_i | in_j).
class CondProbVector {
 public:
  CondProbVector() = default;

  CondProbVector(std::size_t n_out, std::size_t n_in, std::vector<double> values)
      : n_out_(n_out), n_in_(n_in), values_(std::move(values)) {
    if (n_out_ == 0 || n_in_ == 0) throw InvalidDistribution("CondProbVector: empty");
    if (values_.size() != n_out_ * n_in_) {
      throw ShapeError("CondProbVector: expected " + std::to_string(n_out_ * n_in_) +
                       " values, got " + std::to_string(values_.size()));
    }
    detail::check_masses(values_, "CondProbVector");
    for (std::size_t j = 0; j < n_in_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n_out_; ++i) s += values_[i * n_in_ + j];
      if (std::abs(s - 1.0) > kNormTol) {
        throw InvalidDistribution("CondProbVector: column " + std::to_string(j) +
                                  " sums to " + std::to_string(s));
      }
      for (std::size_t i = 0; i < n_out_; ++i) values_[i * n_in_ + j] /= s;
    }
  }

  static CondProbVector identity(std::size_t n) {
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    return CondProbVector(n, n, std::move(v));
  }

  /// Every column equal to `p` (output independent of input).
  static CondProbVector product(const ProbVector& p, std::size_t n_in) {
    std::vector<double> v(p.size() * n_in);
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = 0; j < n_in; ++j) v[i * n_in + j] = p[i];
    return CondProbVector(p.size(), n_in, std::move(v));
  }

  std::size_t n_out() const { return n_out_; }
  std::size_t n_in() const { return n_in_; }
  std::size_t size() const { return values_.size(); }
  double at(std::size_t out, std::size_t in) const { return values_[out * n_in_ + in]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vec() const { return values_; }

  std::vector<double> column(std::size_t in) const {
    std::vector<double> c(n_out_);
    for (std::size_t i = 0; i < n_out_; ++i) c[i] = at(i, in);
    return c;
  }

 private:
  std::size_t n_out_ = 0;
  std::size_t n_in_ = 0;
  std::vector<double> values_;
};

/// Known joint p(x, y) with its marginals and both channels.
struct JointPMF {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> table;  // row-major, table[x * ny + y]
  ProbVector p_x;
  ProbVector p_y;
  CondProbVector x_given_y;  // n_out = nx, n_in = ny
  CondProbVector y_given_x;  // n_out = ny, n_in = nx

  double at(std::size_t x, std::size_t y) const { return table[x * ny + y]; }
};

/// Normalizes a nonnegative nx-by-ny table (row-major) into a JointPMF.
inline JointPMF build_joint(std::size_t nx, std::size_t ny, std::span<const double> flat) {
  if (nx == 0 || ny == 0) throw InvalidDistribution("build_joint: empty table");
  if (flat.size() != nx * ny) throw ShapeError("build_joint: table size mismatch");
  for (std::size_t k = 0; k < flat.size(); ++k) {
    if (!(flat[k] >= 0.0) || !std::isfinite(flat[k])) {
      throw InvalidDistribution("build_joint: negative or non-finite entry at row " +
                                std::to_string(k / ny) + ", col " + std::to_string(k % ny));
    }
  }
  const double total = std::accumulate(flat.begin(), flat.end(), 0.0);
  if (total <= 0.0) throw InvalidDistribution("build_joint: table sums to zero");

  JointPMF j;
  j.nx = nx;
  j.ny = ny;
  j.table.assign(flat.begin(), flat.end());
  for (double& v : j.table) v /= total;

  std::vector<double> px(nx, 0.0), py(ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      px[x] += j.at(x, y);
      py[y] += j.at(x, y);
    }
  // Absorb rounding so the ProbVector check never trips on a valid table.
  const double sx = std::accumulate(px.begin(), px.end(), 0.0);
  const double sy = std::accumulate(py.begin(), py.end(), 0.0);
  for (double& v : px) v /= sx;
  for (double& v : py) v /= sy;

  std::vector<double> xy(nx * ny), yx(ny * nx);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x)
      xy[x * ny + y] = py[y] > 0.0 ? j.at(x, y) / py[y] : 1.0 / static_cast<double>(nx);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y)
      yx[y * nx + x] = px[x] > 0.0 ? j.at(x, y) / px[x] : 1.0 / static_cast<double>(ny);

  j.p_x = ProbVector(std::move(px));
  j.p_y = ProbVector(std::move(py));
  j.x_given_y = CondProbVector(nx, ny, std::move(xy));
  j.y_given_x = CondProbVector(ny, nx, std::move(yx));
  return j;
}

inline JointPMF build_joint(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw InvalidDistribution("build_joint: empty table");
  const std::size_t ny = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * ny);
  for (const auto& r : rows) {
    if (r.size() != ny) throw ShapeError("build_joint: ragged rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return build_joint(rows.size(), ny, flat);
}

/// Joint built from a channel p(y|x) (columns indexed by x) and a prior p(x).
inline JointPMF joint_from_channel(const CondProbVector& y_given_x, const ProbVector& p_x) {
  if (y_given_x.n_in() != p_x.size()) throw ShapeError("joint_from_channel: prior size");
  const std::size_t nx = p_x.size(), ny = y_given_x.n_out();
  std::vector<double> flat(nx * ny);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) flat[x * ny + y] = y_given_x.at(y, x) * p_x[x];
  return build_joint(nx, ny, flat);
}

inline double entropy_bits(const ProbVector& p) { return detail::neg_sum_wlogw(p.values()); }

inline double conditional_entropy_bits(const CondProbVector& cond, const ProbVector& prior) {
  if (cond.n_in() != prior.size()) {
    throw ShapeError("conditional_entropy_bits: channel has " + std::to_string(cond.n_in()) +
                     " inputs, prior has " + std::to_string(prior.size()));
  }
  double h = 0.0;
  for (std::size_t j = 0; j < cond.n_in(); ++j) {
    double hj = 0.0;
    for (std::size_t i = 0; i < cond.n_out(); ++i) {
      const double w = cond.at(i, j);
      if (w > 0.0) hj -= w * std::log2(w);
    }
    h += prior[j] * hj;
  }
  return h;
}

/// Output marginal sum_j cond(i|j) prior(j).
inline ProbVector marginalize(const CondProbVector& cond, const ProbVector& prior) {
  if (cond.n_in() != prior.size()) throw ShapeError("marginalize: prior size mismatch");
  std::vector<double> out(cond.n_out(), 0.0);
  for (std::size_t i = 0; i < cond.n_out(); ++i)
    for (std::size_t j = 0; j < cond.n_in(); ++j) out[i] += cond.at(i, j) * prior[j];
  const double s = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& v : out) v /= s;
  return ProbVector(std::move(out));
}

/// Chains p(z|x) with p(x|y) into p(z|y) = sum_x p(z|x) p(x|y).
inline CondProbVector compose(const CondProbVector& z_given_x, const CondProbVector& x_given_y) {
  if (z_given_x.n_in() != x_given_y.n_out()) throw ShapeError("compose: inner dims differ");
  const std::size_t nz = z_given_x.n_out(), nx = z_given_x.n_in(), ny = x_given_y.n_in();
  std::vector<double> out(nz * ny, 0.0);
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t y = 0; y < ny; ++y) {
      double s = 0.0;
      for (std::size_t x = 0; x < nx; ++x) s += z_given_x.at(z, x) * x_given_y.at(x, y);
      out[z * ny + y] = s;
    }
  for (std::size_t y = 0; y < ny; ++y) {
    double s = 0.0;
    for (std::size_t z = 0; z < nz; ++z) s += out[z * ny + y];
    for (std::size_t z = 0; z < nz; ++z) out[z * ny + y] /= s;
  }
  return CondProbVector(nz, ny, std::move(out));
}

inline double mutual_information_bits(const CondProbVector& cond, const ProbVector& prior) {
  const double mi = entropy_bits(marginalize(cond, prior)) - conditional_entropy_bits(cond, prior);
  return std::max(0.0, mi);
}

/// I(X;Y) of a joint.
inline double mutual_information_bits(const JointPMF& j) {
  return mutual_information_bits(j.y_given_x, j.p_x);
}

namespace detail {

// Raises masses below eps to eps and pays for it from the mass above eps,
// shrinking every above-floor excess by the same factor.
inline void floor_column(std::span<double> w, double eps) {
  double deficit = 0.0, excess = 0.0;
  for (double v : w) {
    if (v < eps) deficit += eps - v;
    else excess += v - eps;
  }
  if (deficit == 0.0) return;
  const double keep = 1.0 - deficit / excess;
  for (double& v : w) v = v < eps ? eps : eps + (v - eps) * keep;
}

inline void check_floor(double eps, std::size_t n_out) {
  if (!(eps > 0.0)) throw InfeasibleFloor("floor must be positive");
  if (eps * static_cast<double>(n_out) >= 1.0) {
    throw InfeasibleFloor("floor " + std::to_string(eps) + " is not below 1/" +
                          std::to_string(n_out));
  }
}

}  // namespace detail

/// Returns a copy whose masses are all >= eps, with the same total mass.
inline ProbVector floor_and_renormalize(const ProbVector& p, double eps) {
  detail::check_floor(eps, p.size());
  std::vector<double> w = p.vec();
  detail::floor_column(w, eps);
  return ProbVector(std::move(w));
}

inline CondProbVector floor_and_renormalize(const CondProbVector& p, double eps) {
  detail::check_floor(eps, p.n_out());
  std::vector<double> w = p.vec();
  std::vector<double> col(p.n_out());
  for (std::size_t j = 0; j < p.n_in(); ++j) {
    for (std::size_t i = 0; i < p.n_out(); ++i) col[i] = w[i * p.n_in() + j];
    detail::floor_column(col, eps);
    for (std::size_t i = 0; i < p.n_out(); ++i) w[i * p.n_in() + j] = col[i];
  }
  return CondProbVector(p.n_out(), p.n_in(), std::move(w));
}

}  // namespace ibpf
