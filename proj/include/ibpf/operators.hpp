#pragma once

// Structured linear operators for the consistency constraint A p - B q.
// Kronecker kinds are applied matrix-free; dense materialization is only used
// for spectral queries and tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ibpf/error.hpp"
#include "ibpf/prob.hpp"

namespace ibpf {

class StructuredOperator {
 public:
  enum class Kind { Identity, KronRowVec, KronMat, VStack };

  static StructuredOperator identity(std::size_t n) {
    StructuredOperator op;
    op.kind_ = Kind::Identity;
    op.in_ = op.out_ = n;
    return op;
  }

  /// I_{nz} (x) v^T : R^{nz * |v|} -> R^{nz}.
  static StructuredOperator kron_row_vec(std::size_t nz, std::vector<double> v) {
    StructuredOperator op;
    op.kind_ = Kind::KronRowVec;
    op.nz_ = nz;
    op.rows_ = 1;
    op.cols_ = v.size();
    op.factor_ = std::move(v);
    op.in_ = nz * op.cols_;
    op.out_ = nz;
    return op;
  }

  /// I_{nz} (x) W^T with W stored rows-by-cols row-major:
  /// R^{nz * rows} -> R^{nz * cols}.
  static StructuredOperator kron_mat(std::size_t nz, std::size_t rows, std::size_t cols,
                                     std::vector<double> w) {
    if (w.size() != rows * cols) throw ShapeError("kron_mat: factor size mismatch");
    StructuredOperator op;
    op.kind_ = Kind::KronMat;
    op.nz_ = nz;
    op.rows_ = rows;
    op.cols_ = cols;
    op.factor_ = std::move(w);
    op.in_ = nz * rows;
    op.out_ = nz * cols;
    return op;
  }

  static StructuredOperator vstack(std::vector<StructuredOperator> children) {
    if (children.empty()) throw ShapeError("vstack: no children");
    StructuredOperator op;
    op.kind_ = Kind::VStack;
    op.in_ = children.front().input_dim();
    op.out_ = 0;
    for (const auto& c : children) {
      if (c.input_dim() != op.in_) throw ShapeError("vstack: children disagree on input_dim");
      op.out_ += c.output_dim();
    }
    op.children_ = std::move(children);
    return op;
  }

  /// Q_x = I (x) p_x^T: maps p(z|x) to p(z).
  static StructuredOperator marginal_map(std::size_t nz, const ProbVector& p_x) {
    return kron_row_vec(nz, p_x.vec());
  }

  /// Q_{x|y} = I (x) W_{x|y}^T: maps p(z|x) to p(z|y).
  static StructuredOperator markov_map(std::size_t nz, const CondProbVector& x_given_y) {
    // CondProbVector storage (x-major, x * ny + y) is already W row-major.
    return kron_mat(nz, x_given_y.n_out(), x_given_y.n_in(), x_given_y.vec());
  }

  Kind kind() const { return kind_; }
  std::size_t input_dim() const { return in_; }
  std::size_t output_dim() const { return out_; }
  std::size_t blocks() const { return nz_; }
  std::size_t factor_rows() const { return rows_; }
  std::size_t factor_cols() const { return cols_; }
  const std::vector<double>& factor() const { return factor_; }
  const std::vector<StructuredOperator>& children() const { return children_; }

  void apply_into(std::span<const double> v, std::span<double> out) const {
    if (v.size() != in_ || out.size() != out_) {
      throw ShapeError("apply: expected " + std::to_string(in_) + " -> " + std::to_string(out_) +
                       ", got " + std::to_string(v.size()) + " -> " + std::to_string(out.size()));
    }
    switch (kind_) {
      case Kind::Identity:
        std::copy(v.begin(), v.end(), out.begin());
        break;
      case Kind::KronRowVec:
        for (std::size_t z = 0; z < nz_; ++z) {
          double s = 0.0;
          for (std::size_t x = 0; x < cols_; ++x) s += factor_[x] * v[z * cols_ + x];
          out[z] = s;
        }
        break;
      case Kind::KronMat:
        for (std::size_t z = 0; z < nz_; ++z)
          for (std::size_t c = 0; c < cols_; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < rows_; ++r) s += factor_[r * cols_ + c] * v[z * rows_ + r];
            out[z * cols_ + c] = s;
          }
        break;
      case Kind::VStack: {
        std::size_t off = 0;
        for (const auto& c : children_) {
          c.apply_into(v, out.subspan(off, c.output_dim()));
          off += c.output_dim();
        }
        break;
      }
    }
  }

  void apply_transpose_into(std::span<const double> u, std::span<double> out) const {
    if (u.size() != out_ || out.size() != in_) {
      throw ShapeError("apply_transpose: expected " + std::to_string(out_) + " -> " +
                       std::to_string(in_) + ", got " + std::to_string(u.size()) + " -> " +
                       std::to_string(out.size()));
    }
    switch (kind_) {
      case Kind::Identity:
        std::copy(u.begin(), u.end(), out.begin());
        break;
      case Kind::KronRowVec:
        for (std::size_t z = 0; z < nz_; ++z)
          for (std::size_t x = 0; x < cols_; ++x) out[z * cols_ + x] = factor_[x] * u[z];
        break;
      case Kind::KronMat:
        for (std::size_t z = 0; z < nz_; ++z)
          for (std::size_t r = 0; r < rows_; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < cols_; ++c) s += factor_[r * cols_ + c] * u[z * cols_ + c];
            out[z * rows_ + r] = s;
          }
        break;
      case Kind::VStack: {
        std::fill(out.begin(), out.end(), 0.0);
        std::vector<double> tmp(in_);
        std::size_t off = 0;
        for (const auto& c : children_) {
          c.apply_transpose_into(u.subspan(off, c.output_dim()), tmp);
          for (std::size_t i = 0; i < in_; ++i) out[i] += tmp[i];
          off += c.output_dim();
        }
        break;
      }
    }
  }

  std::vector<double> apply(std::span<const double> v) const {
    std::vector<double> out(out_);
    apply_into(v, out);
    return out;
  }

  std::vector<double> apply_transpose(std::span<const double> u) const {
    std::vector<double> out(in_);
    apply_transpose_into(u, out);
    return out;
  }

  /// Dense output_dim x input_dim matrix, built column by column from basis vectors.
  Eigen::MatrixXd materialize() const {
    Eigen::MatrixXd m(out_, in_);
    std::vector<double> e(in_, 0.0), col(out_);
    for (std::size_t j = 0; j < in_; ++j) {
      e[j] = 1.0;
      apply_into(e, col);
      for (std::size_t i = 0; i < out_; ++i) m(i, j) = col[i];
      e[j] = 0.0;
    }
    return m;
  }

 private:
  Kind kind_ = Kind::Identity;
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  std::size_t nz_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> factor_;
  std::vector<StructuredOperator> children_;
};

struct SpectralBounds {
  double max_singular = 0.0;     // largest singular value
  double min_singular = 0.0;     // smallest positive singular value
  double min_eig_op_opT = 0.0;   // smallest positive eigenvalue of op * op^T
};

inline constexpr std::size_t kDefaultDenseLimit = 4096;

namespace detail {

inline SpectralBounds bounds_from_singular_values(const Eigen::VectorXd& sv, std::size_t dim) {
  SpectralBounds b;
  if (sv.size() == 0) return b;
  b.max_singular = sv.maxCoeff();
  const double cutoff = b.max_singular * static_cast<double>(dim) * 1e-13;
  double smallest = b.max_singular;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) smallest = std::min(smallest, sv[i]);
  b.min_singular = smallest;
  b.min_eig_op_opT = smallest * smallest;
  return b;
}

inline SpectralBounds dense_bounds(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return bounds_from_singular_values(svd.singularValues(),
                                     static_cast<std::size_t>(std::max(m.rows(), m.cols())));
}

}  // namespace detail

/// Singular-value extremes. Kronecker kinds reduce to the small factor since
/// I (x) W^T has the singular values of W (each repeated nz times).
inline SpectralBounds spectral_bounds(const StructuredOperator& op,
                                      std::size_t dense_limit = kDefaultDenseLimit) {
  using Kind = StructuredOperator::Kind;
  switch (op.kind()) {
    case Kind::Identity:
      return {1.0, 1.0, 1.0};
    case Kind::KronRowVec:
    case Kind::KronMat: {
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(
          op.factor().data(), static_cast<Eigen::Index>(op.factor_rows()),
          static_cast<Eigen::Index>(op.factor_cols()));
      return detail::dense_bounds(w);
    }
    case Kind::VStack:
      break;
  }
  if (std::max(op.input_dim(), op.output_dim()) > dense_limit) {
    throw CapabilityError("spectral_bounds: operator of size " + std::to_string(op.output_dim()) +
                          "x" + std::to_string(op.input_dim()) + " exceeds dense limit " +
                          std::to_string(dense_limit));
  }
  return detail::dense_bounds(op.materialize());
}

}  // namespace ibpf
