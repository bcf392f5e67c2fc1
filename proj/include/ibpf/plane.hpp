#pragma once

#include <utility>

#include "ibpf/auglag.hpp"
#include "ibpf/prob.hpp"

namespace ibpf {

struct PlanePoint {
  double i_xz = 0.0;  // I(X;Z), bits
  double i_yz = 0.0;  // I(Y;Z), bits
};

/// (I(X;Z), I(Y;Z)) of an encoder p(z|x) under the Markov chain Y - X - Z.
inline PlanePoint info_plane_point(const CondProbVector& encoder, const JointPMF& joint) {
  if (encoder.n_in() != joint.nx) throw ShapeError("info_plane_point: encoder inputs != |X|");
  PlanePoint pt;
  pt.i_xz = mutual_information_bits(encoder, joint.p_x);
  pt.i_yz = mutual_information_bits(compose(encoder, joint.x_given_y), joint.p_y);
  return pt;
}

/// The encoder p(z|x) carried by a state of one of the built-in formulations.
inline CondProbVector encoder_of(const SplitProblem& pr, const BlockState& s) {
  if (!pr.joint) throw ConfigError("encoder_of: problem has no joint distribution attached");
  const auto& block = s.block(pr.encoder_block);
  const std::size_t n = pr.nz * pr.joint->nx;
  std::vector<double> w(block.begin() + static_cast<std::ptrdiff_t>(pr.encoder_offset),
                        block.begin() + static_cast<std::ptrdiff_t>(pr.encoder_offset + n));
  // Iterates keep column sums to rounding; renormalize so drift never trips validation.
  for (std::size_t x = 0; x < pr.joint->nx; ++x) {
    double sum = 0.0;
    for (std::size_t z = 0; z < pr.nz; ++z) sum += w[z * pr.joint->nx + x];
    for (std::size_t z = 0; z < pr.nz; ++z) w[z * pr.joint->nx + x] /= sum;
  }
  return CondProbVector(pr.nz, pr.joint->nx, std::move(w));
}

}  // namespace ibpf
