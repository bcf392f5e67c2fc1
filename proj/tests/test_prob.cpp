#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace ibpf;

TEST(Entropy, Examples) {
  EXPECT_DOUBLE_EQ(entropy_bits(ProbVector({0.5, 0.5})), 1.0);
  EXPECT_DOUBLE_EQ(entropy_bits(ProbVector({1.0, 0.0, 0.0})), 0.0);
  EXPECT_NEAR(entropy_bits(ProbVector::uniform(3)), std::log2(3.0), 1e-15);
  EXPECT_NEAR(std::log2(3.0), 1.58496, 1e-5);
}

TEST(ProbVector, Validation) {
  EXPECT_THROW(ProbVector({0.5, -0.1, 0.6}), InvalidDistribution);
  EXPECT_THROW(ProbVector({0.5, 0.6}), InvalidDistribution);
  EXPECT_THROW(ProbVector(std::vector<double>{}), InvalidDistribution);
  ProbVector p({0.5, 0.5 + 5e-13});
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
  EXPECT_THROW(CondProbVector(2, 2, {0.5, 0.5, 0.5}), ShapeError);
  EXPECT_THROW(CondProbVector(2, 2, {0.5, 0.5, 0.6, 0.5}), InvalidDistribution);
}

TEST(ConditionalEntropy, Examples) {
  EXPECT_DOUBLE_EQ(conditional_entropy_bits(CondProbVector::identity(3), ProbVector({0.2, 0.3, 0.5})), 0.0);
  const auto flat = CondProbVector::product(ProbVector::uniform(3), 4);
  EXPECT_NEAR(conditional_entropy_bits(flat, ProbVector::uniform(4)), std::log2(3.0), 1e-14);
  EXPECT_THROW(conditional_entropy_bits(flat, ProbVector::uniform(3)), ShapeError);

  // double sum over the example channel
  const auto t = oracle::example_table();
  double h = 0.0;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      const double pyx = t[x][y] * 3.0;
      h -= (1.0 / 3.0) * pyx * std::log2(pyx);
    }
  const auto j = oracle::example_joint();
  EXPECT_NEAR(conditional_entropy_bits(j.y_given_x, j.p_x), h, 1e-13);
}

TEST(MutualInformation, Examples) {
  const auto prod = CondProbVector::product(ProbVector({0.1, 0.9}), 3);
  EXPECT_NEAR(mutual_information_bits(prod, ProbVector({0.2, 0.3, 0.5})), 0.0, 1e-15);
  EXPECT_NEAR(mutual_information_bits(CondProbVector::identity(3), ProbVector::uniform(3)), std::log2(3.0), 1e-14);
  const auto j = oracle::example_joint();
  EXPECT_NEAR(mutual_information_bits(j), oracle::mi_table(oracle::example_table()), 1e-13);
  EXPECT_NEAR(mutual_information_bits(j), 0.65514, 5e-6);
}

TEST(BuildJoint, Examples) {
  // outer product: every column of p(x|y) equals p_x
  const std::vector<double> px = {0.2, 0.3, 0.5}, py = {0.6, 0.4};
  std::vector<std::vector<double>> rows(3, std::vector<double>(2));
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 2; ++y) rows[x][y] = px[x] * py[y];
  const auto j = build_joint(rows);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 2; ++y) EXPECT_NEAR(j.x_given_y.at(x, y), px[x], 1e-15);

  const auto d = build_joint({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) EXPECT_EQ(d.x_given_y.at(x, y), x == y ? 1.0 : 0.0);

  EXPECT_THROW(build_joint({{0.5, -0.1}, {0.3, 0.3}}), InvalidDistribution);
  EXPECT_THROW(build_joint({{0.0, 0.0}, {0.0, 0.0}}), InvalidDistribution);
  EXPECT_THROW(build_joint({{0.5, 0.1}, {0.3}}), ShapeError);
}

TEST(BuildJoint, ReconstructsTable) {
  CounterRng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t nx = 1 + rng.below(7), ny = 1 + rng.below(7);
    const auto j = oracle::random_joint(rng, nx, ny);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        EXPECT_NEAR(j.x_given_y.at(x, y) * j.p_y[y], j.at(x, y), 1e-12);
        EXPECT_NEAR(j.y_given_x.at(y, x) * j.p_x[x], j.at(x, y), 1e-12);
      }
  }
}

TEST(Floor, Examples) {
  const auto a = floor_and_renormalize(ProbVector({1.0, 0.0}), 0.01);
  EXPECT_NEAR(a[0], 0.99, 1e-15);
  EXPECT_NEAR(a[1], 0.01, 1e-15);
  const auto b = floor_and_renormalize(ProbVector({0.5, 0.5}), 0.01);
  EXPECT_EQ(b[0], 0.5);
  EXPECT_EQ(b[1], 0.5);
  EXPECT_THROW(floor_and_renormalize(ProbVector({0.5, 0.5}), 0.6), InfeasibleFloor);
  EXPECT_THROW(floor_and_renormalize(ProbVector({0.5, 0.5}), 0.0), InfeasibleFloor);
}

TEST(Floor, ConditionalColumns) {
  CounterRng rng(5);
  const auto enc = oracle::random_encoder(rng, 4, 6);
  std::vector<double> w = enc.vec();
  w[0 * 6 + 2] = 0.0;
  double rest = 0.0;
  for (int z = 1; z < 4; ++z) rest += w[z * 6 + 2];
  for (int z = 1; z < 4; ++z) w[z * 6 + 2] /= rest;
  const auto f = floor_and_renormalize(CondProbVector(4, 6, w), 0.05);
  for (std::size_t x = 0; x < 6; ++x) {
    double s = 0.0;
    for (std::size_t z = 0; z < 4; ++z) {
      EXPECT_GE(f.at(z, x), 0.05 - 1e-15);
      s += f.at(z, x);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Properties, EntropyConcave) {
  CounterRng rng(1);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = 2 + rng.below(8);
    const auto p = oracle::rand_simplex(rng, n), q = oracle::rand_simplex(rng, n);
    const double lam = rng.uniform();
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = lam * p[i] + (1 - lam) * q[i];
    EXPECT_GE(entropy_bits(ProbVector(m)) + 1e-12,
              lam * entropy_bits(ProbVector(p)) + (1 - lam) * entropy_bits(ProbVector(q)));
  }
}

TEST(Properties, MutualInformationBounds) {
  CounterRng rng(2);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t nin = 1 + rng.below(8), nout = 1 + rng.below(8);
    const auto enc = oracle::random_encoder(rng, nout, nin);
    const ProbVector prior(oracle::rand_simplex(rng, nin));
    const double mi = mutual_information_bits(enc, prior);
    EXPECT_GE(mi, -1e-12);
    EXPECT_LE(mi, std::min(entropy_bits(prior), std::log2(static_cast<double>(nout))) + 1e-12);
  }
}

TEST(Properties, DataProcessing) {
  CounterRng rng(3);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t nx = 2 + rng.below(7), ny = 2 + rng.below(7), nz = 2 + rng.below(7);
    const auto j = oracle::random_joint(rng, nx, ny);
    const auto enc = oracle::random_encoder(rng, nz, nx);
    const auto ref = oracle::plane(enc, j);
    const auto pt = info_plane_point(enc, j);
    EXPECT_NEAR(pt.i_xz, ref.i_xz, 1e-12);
    EXPECT_NEAR(pt.i_yz, ref.i_yz, 1e-12);
    EXPECT_LE(pt.i_yz, pt.i_xz + 1e-10);
    EXPECT_LE(pt.i_yz, mutual_information_bits(j) + 1e-10);
  }
}

TEST(Compose, MatchesTripleSum) {
  CounterRng rng(4);
  const auto j = oracle::random_joint(rng, 5, 4);
  const auto enc = oracle::random_encoder(rng, 3, 5);
  const auto zy = compose(enc, j.x_given_y);
  for (std::size_t z = 0; z < 3; ++z)
    for (std::size_t y = 0; y < 4; ++y) {
      double s = 0.0;
      for (std::size_t x = 0; x < 5; ++x) s += enc.at(z, x) * j.at(x, y) / j.p_y[y];
      EXPECT_NEAR(zy.at(z, y), s, 1e-14);
    }
  const auto pz = marginalize(enc, j.p_x);
  for (std::size_t z = 0; z < 3; ++z) {
    double s = 0.0;
    for (std::size_t x = 0; x < 5; ++x) s += enc.at(z, x) * j.p_x[x];
    EXPECT_NEAR(pz[z], s, 1e-15);
  }
}

TEST(Plane, Examples) {
  const auto j = oracle::example_joint();
  const auto prod = CondProbVector::product(ProbVector({0.3, 0.3, 0.4}), 3);
  const auto a = info_plane_point(prod, j);
  EXPECT_NEAR(a.i_xz, 0.0, 1e-15);
  EXPECT_NEAR(a.i_yz, 0.0, 1e-15);
  const auto b = info_plane_point(CondProbVector::identity(3), j);
  EXPECT_NEAR(b.i_xz, std::log2(3.0), 1e-14);
  EXPECT_NEAR(b.i_yz, oracle::mi_table(oracle::example_table()), 1e-13);
}
