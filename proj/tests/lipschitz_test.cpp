// Copyright 2026 The qmetric Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qmetric/lipschitz.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmetric/construct.hpp"

namespace qmetric {
namespace {

AlgebraElement diagonal(const Eigen::VectorXd& a) {
  return AlgebraElement(AlgebraShape::classical(static_cast<int>(a.size())), a.cast<Complex>().asDiagonal());
}

State distribution(const Eigen::VectorXd& p) {
  std::vector<Matrix> blocks;
  for (Eigen::Index i = 0; i < p.size(); ++i) blocks.push_back(Matrix::Constant(1, 1, p(i)));
  return State(AlgebraShape::classical(static_cast<int>(p.size())), blocks);
}

Eigen::VectorXd random_distribution(int n, std::mt19937& gen) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p(i) = e(gen);
  return p / p.sum();
}

// M_2 with the admissible element: d(phi, psi) = sqrt(2) lambda ||phi - psi||_HS in closed form.
double m2_closed_form(double lambda, const State& phi, const State& psi) {
  return std::sqrt(2.0) * lambda * (phi.density().data() - psi.density().data()).norm();
}

TEST(StateTest, ValidatesDensities) {
  const AlgebraShape s({2, 1});
  EXPECT_THROW(State(s, {Matrix::Identity(2, 2) * 0.5}), ShapeMismatch);
  EXPECT_THROW(State(s, {Matrix::Identity(2, 2), Matrix::Constant(1, 1, 0.5)}), PreconditionError);
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  EXPECT_THROW(State(s, {neg, Matrix::Zero(1, 1)}), PreconditionError);
  Matrix asym = Matrix::Identity(2, 2) * 0.5;
  asym(0, 1) = 0.3;
  EXPECT_THROW(State(s, {asym, Matrix::Zero(1, 1)}), PreconditionError);
  EXPECT_NO_THROW(State(s, {Matrix::Identity(2, 2) * 0.25, Matrix::Constant(1, 1, 0.5)}));
}

TEST(StateTest, PureAndPointStates) {
  const AlgebraShape s({2, 1});
  Vector v(2);
  v << 1.0, Complex(0.0, 1.0);
  const State p = State::pure(s, PureState{0, v});
  EXPECT_NEAR(p.block_weights()(0), 1.0, 1e-15);
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = Complex(0.0, -1.0);
  a(1, 0) = Complex(0.0, 1.0);
  // <a v, v> / |v|^2 with v = (1, i)
  EXPECT_NEAR(p.pairing(AlgebraElement(s, a)), 1.0, 1e-15);
  EXPECT_NEAR(State::point(s, 1).pairing(identity(s)), 1.0, 1e-15);
  EXPECT_THROW(State::point(s, 0), PreconditionError);
  EXPECT_THROW(State::point(s, 2), PreconditionError);
}

TEST(StateTest, PureDecompositionReassembles) {
  const AlgebraShape s({2, 1});
  Matrix d0(2, 2);
  d0 << 0.4, Complex(0.1, 0.05), Complex(0.1, -0.05), 0.3;
  const State st(s, {d0, Matrix::Constant(1, 1, 0.3)});
  Matrix sum = Matrix::Zero(3, 3);
  double weight = 0.0;
  for (const auto& [w, ps] : st.pure_decomposition()) {
    Vector e = Vector::Zero(3);
    e.segment(s.offset(ps.block), ps.v.size()) = ps.v;
    sum += w * e * e.adjoint();
    weight += w;
  }
  EXPECT_NEAR(weight, 1.0, 1e-12);
  EXPECT_LT((sum - st.density().data()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LipschitzTest, ClassicalMatchesCombinatorialConstant) {
  std::mt19937 gen(31);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5;
    const Eigen::MatrixXd d = testing::random_metric(n, gen);
    const MetricCandidate m = from_finite_metric(FiniteMetricSpace{d});
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a(i) = nd(gen);
    EXPECT_NEAR(lip_seminorm(diagonal(a), m), testing::combinatorial_lipschitz(d, a), 1e-9);
  }
}

TEST(LipschitzTest, SeminormProperties) {
  const MetricCandidate m = direct_sum(MetricCandidate(m2_admissible(1.0)),
                                       from_finite_metric(FiniteMetricSpace{Eigen::MatrixXd::Zero(1, 1)}), 1.5);
  const LipschitzSeminorm lip(m);
  CounterRng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const AlgebraElement a = random_hermitian<1>(m.shape(), rng);
    const AlgebraElement b = random_hermitian<1>(m.shape(), rng);
    EXPECT_NEAR(lip(a + Complex(3.7) * identity(m.shape())), lip(a), 1e-10);
    EXPECT_NEAR(lip(Complex(-2.5) * a), 2.5 * lip(a), 1e-10);
    EXPECT_LE(lip(a + b), lip(a) + lip(b) + 1e-10);
  }
  EXPECT_NEAR(lip(identity(m.shape())), 0.0, 1e-12);
}

TEST(LipschitzTest, M2ClosedForm) {
  // pinv = projector onto (f_2 - f_3)/sqrt2 divided by 2 lambda, so L(a) = sqrt(2 tr a_0^2) / (2 lambda)
  for (double lam : {0.1, 1.0, 10.0}) {
    const LipschitzSeminorm lip{MetricCandidate(m2_admissible(lam))};
    CounterRng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
      const AlgebraElement a = random_hermitian<1>(AlgebraShape({2}), rng);
      const Matrix a0 = a.data() - a.data().trace() / 2.0 * Matrix::Identity(2, 2);
      EXPECT_NEAR(lip(a), std::sqrt(2.0 * (a0 * a0).trace().real()) / (2.0 * lam), 1e-10 / lam);
    }
  }
}

TEST(LipschitzTest, RejectsMetricsWithoutPreconditions) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(lip_seminorm(identity(AlgebraShape::classical(2)), MetricCandidate(classical_embedding(d))),
               PreconditionError);
  const MetricCandidate m(m2_admissible(1.0));
  EXPECT_THROW(lip_seminorm(identity(AlgebraShape({1, 1})), m), ShapeMismatch);
}

TEST(LipschitzTest, PseudoInverseOfM2) {
  const BiElement pinv = metric_pseudo_inverse(MetricCandidate(m2_admissible(2.0)));
  EXPECT_LT((pinv.data() - testing::m2_rho_unit().cast<Complex>() / 8.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(LeibnizTest, HoldsOnRandomCommutingPairs) {
  std::mt19937 gen(41);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    const MetricCandidate m = from_finite_metric(FiniteMetricSpace{testing::random_metric(n, gen)});
    Eigen::VectorXd a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a(i) = nd(gen);
      b(i) = nd(gen);
    }
    const LeibnizResult r = check_leibniz(diagonal(a), diagonal(b), m);
    EXPECT_TRUE(r.holds) << r.lhs << " > " << r.rhs;
    EXPECT_NEAR(r.slack, r.rhs - r.lhs, 1e-15);
  }
  // commuting pair on a non-classical shape: polynomials in one self-adjoint element
  CounterRng rng(2);
  const MetricCandidate m(m2_admissible(1.0));
  const AlgebraElement h = random_hermitian<1>(m.shape(), rng);
  EXPECT_TRUE(check_leibniz(h, h * h + Complex(2.0) * h, m).holds);
}

TEST(LeibnizTest, RejectsNonCommutingPair) {
  const MetricCandidate m(m2_admissible(1.0));
  Matrix x = Matrix::Zero(2, 2), z = Matrix::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1.0;
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  EXPECT_THROW(check_leibniz(AlgebraElement(m.shape(), x), AlgebraElement(m.shape(), z), m), PreconditionError);
}

TEST(TransportTest, LinearProgramMatchesFlowOracle) {
  std::mt19937 gen(51);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 6;
    const Eigen::MatrixXd d = testing::random_metric(n, gen);
    const Eigen::VectorXd p = random_distribution(n, gen);
    const Eigen::VectorXd q = random_distribution(n, gen);
    EXPECT_NEAR(classical_mk_distance(d, p, q), testing::transport_cost(d, p, q), 1e-9);
  }
}

TEST(TransportTest, PointMassesGiveTheDistance) {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 2, 1, 0, 1.5, 2, 1.5, 0;
  const MetricCandidate m = from_finite_metric(FiniteMetricSpace{d});
  const AlgebraShape& s = m.shape();
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      const MkBracket b = mk_distance(State::point(s, x), State::point(s, y), m);
      EXPECT_TRUE(b.exact);
      EXPECT_NEAR(b.lower, d(x, y), 1e-12);
      EXPECT_NEAR(b.upper, d(x, y), 1e-12);
      if (x != y) {
        EXPECT_NEAR(pure_state_bound(PureState{x, Vector::Ones(1)}, PureState{y, Vector::Ones(1)}, m), d(x, y), 1e-15);
      }
    }
}

TEST(TransportTest, AscentAgreesWithLinearProgram) {
  std::mt19937 gen(61);
  MkOptions opt;
  opt.force_ascent = true;
  opt.max_iter = 2000;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 3 + trial % 2;
    const Eigen::MatrixXd d = testing::random_metric(n, gen);
    const MetricCandidate m = from_finite_metric(FiniteMetricSpace{d});
    const State phi = distribution(random_distribution(n, gen));
    const State psi = distribution(random_distribution(n, gen));
    const double exact = mk_distance(phi, psi, m).lower;
    const MkBracket b = mk_distance(phi, psi, m, {}, opt);
    EXPECT_FALSE(b.exact);
    EXPECT_LE(b.lower, exact + 1e-9);
    EXPECT_NEAR(b.lower, exact, 1e-6 * std::max(1.0, exact));
    EXPECT_GE(b.upper, exact - 1e-9);
    EXPECT_NEAR(b.upper, exact, 1e-6 * std::max(1.0, exact));
  }
}

TEST(TransportTest, AscentHistoryIsMonotone) {
  const MetricCandidate m(m2_admissible(1.0));
  Vector v(2);
  v << 1.0, 0.0;
  Vector w(2);
  w << 0.6, Complex(0.0, 0.8);
  const MkBracket b = mk_distance(State::pure(m.shape(), {0, v}), State::pure(m.shape(), {0, w}), m);
  ASSERT_GE(b.lower_history.size(), 2u);
  for (std::size_t i = 1; i < b.lower_history.size(); ++i) EXPECT_GE(b.lower_history[i], b.lower_history[i - 1]);
}

TEST(TransportTest, M2AscentReachesClosedForm) {
  for (double lam : {0.1, 1.0, 10.0}) {
    const MetricCandidate m(m2_admissible(lam));
    const AlgebraShape& s = m.shape();
    Vector e1 = Vector::Zero(2), mix(2);
    e1(0) = 1.0;
    mix << std::sqrt(0.3), Complex(0.0, std::sqrt(0.7));
    const State phi = State::pure(s, {0, e1});
    const State psi = State::pure(s, {0, mix});
    const MkBracket b = mk_distance(phi, psi, m);
    const double expect = m2_closed_form(lam, phi, psi);
    EXPECT_LE(b.lower, expect * (1.0 + 1e-9));
    EXPECT_NEAR(b.lower, expect, 1e-6 * expect);
    EXPECT_GE(b.upper, expect * (1.0 - 1e-9));
    EXPECT_LT(b.upper, 1.1 * expect);
    EXPECT_FALSE(b.unbounded);
  }
}

TEST(TransportTest, IdenticalStatesAreAtDistanceZero) {
  const MetricCandidate m(m2_admissible(1.0));
  const State phi = State::from_density(AlgebraElement(m.shape(), Matrix::Identity(2, 2) * 0.5));
  const MkBracket b = mk_distance(phi, phi, m);
  EXPECT_EQ(b.lower, 0.0);
  EXPECT_EQ(b.upper, 0.0);
}

TEST(TransportTest, DisjointBlocksAreBracketed) {
  const double r = 1.5;
  const MetricCandidate m = direct_sum(MetricCandidate(m2_admissible(1.0)),
                                       from_finite_metric(FiniteMetricSpace{Eigen::MatrixXd::Zero(1, 1)}), r);
  CounterRng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    Vector v = random_gaussian(2, 1, rng).col(0).normalized();
    const PureState a{0, v};
    const PureState b{1, Vector::Ones(1)};
    const double bound = pure_state_bound(a, b, m);
    EXPECT_NEAR(bound, r, 1e-12);
    const MkBracket br = mk_distance(State::pure(m.shape(), a), State::pure(m.shape(), b), m);
    EXPECT_LE(br.upper, bound + 1e-12);
    EXPECT_LE(br.lower, br.upper + 1e-8);
    EXPECT_GT(br.lower, 0.0);
  }
}

TEST(PureStateBoundTest, Preconditions) {
  const MetricCandidate m = direct_sum(MetricCandidate(m2_admissible(1.0)),
                                       from_finite_metric(FiniteMetricSpace{Eigen::MatrixXd::Zero(1, 1)}), 1.0);
  Vector v(2);
  v << 1.0, 0.0;
  EXPECT_THROW(pure_state_bound({0, v}, {0, v}, m), PreconditionError);
  EXPECT_THROW(pure_state_bound({0, 2.0 * v}, {1, Vector::Ones(1)}, m), PreconditionError);
  EXPECT_THROW(pure_state_bound({0, Vector::Ones(1)}, {1, Vector::Ones(1)}, m), ShapeMismatch);
}

}  // namespace
}  // namespace qmetric
