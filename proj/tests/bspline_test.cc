// Copyright 2026 The splinehorizon Authors
//
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

#include "splinehorizon/bspline.h"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles.h"

namespace splinehorizon {
namespace {

KnotLayout RandomLayout(std::mt19937& rng, int min_order, int max_order,
                        int min_continuity) {
  std::uniform_int_distribution<int> order_dist(min_order, max_order);
  const int p = order_dist(rng);
  std::uniform_int_distribution<int> count_dist(0, 4);
  const int count = count_dist(rng);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::set<double> interior;
  while (static_cast<int>(interior.size()) < count) {
    interior.insert(std::round(u(rng) * 1000.0) / 1000.0);
  }
  std::uniform_real_distribution<double> end_dist(0.96, 1.0);
  std::vector<double> bp{0.0};
  bp.insert(bp.end(), interior.begin(), interior.end());
  bp.push_back(end_dist(rng));
  std::uniform_int_distribution<int> c_dist(std::min(min_continuity, p - 1),
                                            p - 1);
  std::vector<int> c;
  for (int i = 0; i < count; ++i) c.push_back(c_dist(rng));
  return KnotLayout(bp, c, p);
}

Spline RandomSpline(std::mt19937& rng, const KnotLayout& layout) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd c(layout.dimension());
  for (auto& v : c) v = n(rng);
  return Spline(layout, c);
}

std::vector<double> Samples(double end, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = end * i / (count - 1);
  return out;
}

TEST(KnotLayoutTest, NoInteriorBreakpoints) {
  const KnotLayout l({0.0, 1.0}, {}, 6);
  EXPECT_EQ(l.dimension(), 6);
  EXPECT_EQ(l.knots(), std::vector<double>({0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1}));
}

TEST(KnotLayoutTest, InteriorMultiplicityIsOrderMinusContinuity) {
  const KnotLayout l({0.0, 0.4, 1.0}, {3}, 6);
  EXPECT_EQ(l.dimension(), 9);
  EXPECT_EQ(std::count(l.knots().begin(), l.knots().end(), 0.4), 3);
}

TEST(KnotLayoutTest, RejectsInvalidInput) {
  EXPECT_THROW(KnotLayout({0.0, 0.5, 1.0}, {6}, 6), std::invalid_argument);
  EXPECT_THROW(KnotLayout({0.0, 0.5, 1.0}, {-1}, 6), std::invalid_argument);
  EXPECT_THROW(KnotLayout({0.0, 0.5, 0.5, 1.0}, {3, 3}, 6),
               std::invalid_argument);
  EXPECT_THROW(KnotLayout({0.1, 1.0}, {}, 6), std::invalid_argument);
  EXPECT_THROW(KnotLayout({0.0, 1.0}, {}, 0), std::invalid_argument);
}

TEST(KnotLayoutTest, GrevilleSitesOfBezierLayout) {
  const std::vector<double> xi = KnotLayout::Clamped(6).GrevilleSites();
  const std::vector<double> expected{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  ASSERT_EQ(xi.size(), expected.size());
  for (size_t i = 0; i < xi.size(); ++i) EXPECT_NEAR(xi[i], expected[i], 1e-15);
}

TEST(KnotLayoutTest, GrevilleSitesOfLinearLayout) {
  const KnotLayout l({0.0, 0.5, 1.0}, {1}, 2);
  EXPECT_EQ(l.GrevilleSites(), std::vector<double>({0.0, 0.5, 1.0}));
}

TEST(KnotLayoutTest, GrevilleSitesMatchAveragingFormula) {
  const KnotLayout l({0.0, 0.4, 1.0}, {3}, 6);
  // Knots written out by hand: 0 x6, 0.4 x3, 1 x6.
  std::vector<double> t(6, 0.0);
  t.insert(t.end(), 3, 0.4);
  t.insert(t.end(), 6, 1.0);
  const std::vector<double> xi = l.GrevilleSites();
  ASSERT_EQ(xi.size(), 9u);
  for (int n = 0; n < 9; ++n) {
    double avg = 0.0;
    for (int i = 1; i <= 5; ++i) avg += t[n + i];
    EXPECT_NEAR(xi[n], avg / 5.0, 1e-15);
    if (n > 0) {
      EXPECT_GE(xi[n], xi[n - 1]);
    }
  }
  EXPECT_EQ(xi.front(), 0.0);
  EXPECT_EQ(xi.back(), 1.0);
}

TEST(KnotLayoutTest, GrevilleUndefinedForOrderOne) {
  EXPECT_THROW(KnotLayout::Clamped(1).GrevilleSites(), std::invalid_argument);
}

TEST(BasisTest, PartitionOfUnityAndNonNegativity) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const KnotLayout l = RandomLayout(rng, 1, 8, 0);
    const double tau = u(rng) * l.domain_end();
    const Eigen::VectorXd b = EvalBasis(l, tau);
    EXPECT_NEAR(b.sum(), 1.0, 1e-12);
    EXPECT_GE(b.minCoeff(), -1e-14);
    EXPECT_LE((b.array() != 0.0).count(), l.order());
  }
}

TEST(BasisTest, PiecewiseConstant) {
  const KnotLayout l({0.0, 0.5, 1.0}, {0}, 1);
  const Eigen::VectorXd b = EvalBasis(l, 0.25);
  EXPECT_EQ(b[0], 1.0);
  EXPECT_EQ(b[1], 0.0);
}

TEST(BasisTest, MatchesRecursiveDefinitionAtBreakpoint) {
  const KnotLayout l({0.0, 0.4, 1.0}, {3}, 6);
  const Eigen::VectorXd b = EvalBasis(l, 0.4);
  for (int i = 0; i < l.dimension(); ++i) {
    EXPECT_NEAR(b[i], oracle::Basis(l.knots(), i, 6, 0.4), 1e-14);
  }
}

TEST(BasisTest, MatchesRecursiveDefinitionOnRandomLayouts) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const KnotLayout l = RandomLayout(rng, 1, 7, 0);
    const double tau = u(rng) * l.domain_end();
    const Eigen::VectorXd b = EvalBasis(l, tau);
    for (int i = 0; i < l.dimension(); ++i) {
      EXPECT_NEAR(b[i], oracle::Basis(l.knots(), i, l.order(), tau), 1e-12);
    }
  }
}

TEST(BasisTest, RejectsParameterOutsideDomain) {
  const KnotLayout l({0.0, 0.8}, {}, 4);
  EXPECT_THROW(EvalBasis(l, 0.9), std::out_of_range);
  EXPECT_THROW(EvalBasis(l, -0.1), std::out_of_range);
}

TEST(SplineTest, ConstantCoefficients) {
  const Spline s = Spline::Constant(KnotLayout({0.0, 0.3, 1.0}, {2}, 5), 7.3);
  for (double tau : Samples(1.0, 101)) EXPECT_NEAR(s(tau), 7.3, 1e-12);
}

TEST(SplineTest, LinearPrecision) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const KnotLayout l = RandomLayout(rng, 2, 8, 0);
    const std::vector<double> xi = l.GrevilleSites();
    const Spline s(l, Eigen::Map<const Eigen::VectorXd>(
                          xi.data(), static_cast<Eigen::Index>(xi.size())));
    for (double tau : Samples(l.domain_end(), 200)) {
      EXPECT_NEAR(s(tau), tau, 1e-12);
    }
  }
}

TEST(SplineTest, MatchesSegmentPolynomials) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const KnotLayout l = RandomLayout(rng, 2, 7, 0);
    const Spline s = RandomSpline(rng, l);
    const std::vector<double>& bp = l.breakpoints();
    // One polynomial per segment from p interior samples, evaluated by
    // Horner at other points of the same segment.
    for (size_t k = 0; k + 1 < bp.size(); ++k) {
      const double a = bp[k];
      const double b = bp[k + 1];
      std::vector<double> x, y;
      for (int i = 0; i < l.order(); ++i) {
        x.push_back(a + (b - a) * (i + 0.5) / l.order());
        y.push_back(oracle::Evaluate(l.knots(), l.order(), s.coefficients(),
                                     x.back()));
      }
      const oracle::LocalPolynomial poly(x, y, a, b - a);
      for (int i = 0; i < 50; ++i) {
        const double tau = a + (b - a) * u(rng);
        EXPECT_NEAR(s(tau), poly(tau), 1e-9);
      }
    }
  }
}

TEST(InsertKnotTest, PreservesFunction) {
  const KnotLayout l = KnotLayout::Clamped(6);
  Eigen::VectorXd c(6);
  c << 0.3, -1.0, 2.0, 0.5, -0.7, 1.1;
  const Spline s(l, c);
  const Spline once = InsertKnot(s, 0.5);
  const Spline twice = InsertKnot(once, 0.5);
  EXPECT_EQ(std::count(twice.layout().knots().begin(),
                       twice.layout().knots().end(), 0.5),
            2);
  for (double tau : Samples(1.0, 1000)) {
    EXPECT_NEAR(once(tau), s(tau), 1e-10);
    EXPECT_NEAR(twice(tau), s(tau), 1e-10);
  }
}

TEST(InsertKnotTest, RandomSplinesAndHullTightening) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int trial = 0; trial < 100; ++trial) {
    const KnotLayout l = RandomLayout(rng, 2, 7, 1);
    const Spline s = RandomSpline(rng, l);
    double tau = u(rng) * l.domain_end();
    const Spline r = InsertKnot(s, tau);
    EXPECT_EQ(r.layout().dimension(), l.dimension() + 1);
    for (double x : Samples(l.domain_end(), 1000)) {
      EXPECT_NEAR(r(x), s(x), 1e-10);
    }
    const HullBounds before = ComputeHullBounds(s);
    const HullBounds after = ComputeHullBounds(r);
    EXPECT_LE(after.upper - after.lower, before.upper - before.lower + 1e-14);
  }
}

TEST(InsertKnotTest, RejectsBoundaryAndOverflow) {
  const Spline s = Spline::Constant(KnotLayout({0.0, 0.5, 1.0}, {0}, 3), 1.0);
  EXPECT_THROW(InsertKnot(s, 0.0), std::invalid_argument);
  EXPECT_THROW(InsertKnot(s, 1.0), std::invalid_argument);
  EXPECT_THROW(InsertKnot(s, 0.5), std::invalid_argument);
}

TEST(ExtractTailTest, ReproducesShiftedFunction) {
  std::mt19937 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const KnotLayout l = RandomLayout(rng, 1, 7, 0);
    const Spline s = RandomSpline(rng, l);
    const double offset = 0.3;
    const Spline tail = ExtractTail(s, offset);
    EXPECT_NEAR(tail.layout().domain_end(), l.domain_end() - offset, 1e-15);
    for (double x : Samples(tail.layout().domain_end(), 1000)) {
      EXPECT_NEAR(tail(x), s(x + offset), 1e-10);
    }
  }
}

TEST(ExtractTailTest, DropsPassedBreakpoints) {
  const KnotLayout l({0.0, 0.2, 0.6, 1.0}, {3, 3}, 6);
  const Spline tail = ExtractTail(Spline::Constant(l, 1.0), 0.25);
  const std::vector<double>& bp = tail.layout().breakpoints();
  ASSERT_EQ(bp.size(), 3u);
  EXPECT_NEAR(bp[1], 0.35, 1e-15);
}

TEST(ExtractTailTest, RejectsBoundary) {
  const Spline s = Spline::Constant(KnotLayout::Clamped(4), 1.0);
  EXPECT_THROW(ExtractTail(s, 0.0), std::invalid_argument);
  EXPECT_THROW(ExtractTail(s, 1.0), std::invalid_argument);
}

TEST(DerivativeTest, ConstantAndLinear) {
  const KnotLayout l({0.0, 0.5, 1.0}, {3}, 6);
  const Spline d = Differentiate(Spline::Constant(l, 4.0));
  EXPECT_NEAR(d.coefficients().cwiseAbs().maxCoeff(), 0.0, 1e-14);
  const std::vector<double> xi = l.GrevilleSites();
  const Spline lin(l, Eigen::Map<const Eigen::VectorXd>(xi.data(), 9));
  const Spline dl = Differentiate(lin);
  EXPECT_EQ(dl.layout().order(), 5);
  for (double tau : Samples(1.0, 50)) EXPECT_NEAR(dl(tau), 1.0, 1e-12);
}

TEST(DerivativeTest, MatchesCentralDifferences) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const KnotLayout l = RandomLayout(rng, 2, 7, 1);
    const Spline s = RandomSpline(rng, l);
    const Spline d = Differentiate(s);
    const std::vector<double>& bp = l.breakpoints();
    for (int i = 0; i < 500; ++i) {
      const double tau = 1e-5 + (l.domain_end() - 2e-5) * u(rng);
      // Central differences straddling a kink are not a derivative.
      bool near_break = false;
      for (double b : bp) near_break |= std::abs(tau - b) < 2e-6;
      if (near_break) continue;
      const double h = 1e-6;
      const double fd = (s(tau + h) - s(tau - h)) / (2 * h);
      EXPECT_NEAR(d(tau), fd, 1e-5 * (1.0 + std::abs(fd)));
    }
  }
}

TEST(DerivativeTest, TwiceGivesOrderMinusTwo) {
  const KnotLayout l({0.0, 0.5, 1.0}, {3}, 6);
  const LinearTransform first = DerivativeTransform(l);
  const LinearTransform second = DerivativeTransform(first.target);
  EXPECT_EQ(second.target.order(), 4);
  EXPECT_EQ(second.matrix.cols(), first.target.dimension());
  EXPECT_EQ(second.matrix.rows(), second.target.dimension());
  EXPECT_THROW(DerivativeTransform(KnotLayout::Clamped(1)),
               std::invalid_argument);
}

TEST(IntegralTest, ConstantAndLinear) {
  const KnotLayout l({0.0, 0.5, 0.8}, {2}, 4);
  EXPECT_NEAR(Integrate(Spline::Constant(l, 3.0)), 2.4, 1e-14);
  const KnotLayout unit({0.0, 0.5, 1.0}, {2}, 4);
  const std::vector<double> xi = unit.GrevilleSites();
  EXPECT_NEAR(Integrate(Spline(unit, Eigen::Map<const Eigen::VectorXd>(
                                         xi.data(), unit.dimension()))),
              0.5, 1e-14);
}

TEST(IntegralTest, MatchesAdaptiveQuadrature) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const KnotLayout l = RandomLayout(rng, 1, 7, 0);
    const Spline s = RandomSpline(rng, l);
    const std::vector<double>& bp = l.breakpoints();
    double q = 0.0;
    for (size_t k = 0; k + 1 < bp.size(); ++k) {
      q += oracle::Integrate(
          [&](double x) {
            return oracle::Evaluate(l.knots(), l.order(), s.coefficients(), x);
          },
          bp[k], bp[k + 1], 1e-13);
    }
    EXPECT_NEAR(Integrate(s), q, 1e-9);
  }
}

TEST(CombineTest, SumLayoutUnion) {
  const KnotLayout a({0.0, 0.3, 1.0}, {3}, 5);
  const KnotLayout b({0.0, 0.6, 1.0}, {3}, 5);
  const KnotLayout s = CombineSumLayout(a, b);
  EXPECT_EQ(s.breakpoints(), std::vector<double>({0.0, 0.3, 0.6, 1.0}));
  EXPECT_EQ(s.continuities(), std::vector<int>({3, 3}));
  EXPECT_EQ(CombineSumLayout(a, a), a);
  EXPECT_THROW(CombineSumLayout(a, KnotLayout::Clamped(6)),
               std::invalid_argument);
  EXPECT_THROW(CombineSumLayout(a, KnotLayout({0.0, 0.3, 1.0}, {2}, 5)),
               std::invalid_argument);
}

TEST(CombineTest, JerkSelfProductKeepsFullMultiplicity) {
  const KnotLayout jerk({0.0, 0.4, 1.0}, {0}, 3);
  const KnotLayout sq = CombineProductLayout(jerk, jerk);
  EXPECT_EQ(sq.order(), 5);
  EXPECT_EQ(sq.continuities(), std::vector<int>({0}));
  EXPECT_EQ(std::count(sq.knots().begin(), sq.knots().end(), 0.4), 5);
}

TEST(CombineTest, ProductOfConstants) {
  const Spline a = Spline::Constant(KnotLayout::Clamped(3), 2.0);
  const Spline b = Spline::Constant(KnotLayout::Clamped(2), -1.5);
  const Spline p = Product(a, b);
  for (double tau : Samples(1.0, 20)) EXPECT_NEAR(p(tau), -3.0, 1e-13);
}

KnotLayout ShiftedLayout(std::mt19937& rng, const KnotLayout& other, int order,
                         int min_continuity) {
  // Interior breakpoints distinct from `other`, same domain.
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::uniform_int_distribution<int> count_dist(0, 3);
  const int count = count_dist(rng);
  const double end = other.domain_end();
  std::set<double> taken(other.breakpoints().begin(), other.breakpoints().end());
  std::set<double> interior;
  while (static_cast<int>(interior.size()) < count) {
    const double v = std::round(u(rng) * end * 997.0) / 997.0;
    if (!taken.count(v) && v > 0.0 && v < end) interior.insert(v);
  }
  std::vector<double> bp{0.0};
  bp.insert(bp.end(), interior.begin(), interior.end());
  bp.push_back(end);
  std::uniform_int_distribution<int> c_dist(std::min(min_continuity, order - 1),
                                            order - 1);
  std::vector<int> c;
  for (int i = 0; i < count; ++i) c.push_back(c_dist(rng));
  return KnotLayout(bp, c, order);
}

TEST(CombineTest, SumAndProductReproducePointwise) {
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> order_dist(2, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const KnotLayout la = RandomLayout(rng, 2, 6, 0);
    const KnotLayout lb = ShiftedLayout(rng, la, la.order(), 0);
    const KnotLayout lc = ShiftedLayout(rng, la, order_dist(rng), 0);
    const Spline a = RandomSpline(rng, la);
    const Spline b = RandomSpline(rng, lb);
    const Spline c = RandomSpline(rng, lc);
    const Spline sum = Sum(a, b);
    const Spline prod = Product(a, c);
    const Spline square = Product(a, a);
    for (double tau : Samples(la.domain_end(), 1000)) {
      EXPECT_NEAR(sum(tau), a(tau) + b(tau), 1e-8);
      EXPECT_NEAR(prod(tau), a(tau) * c(tau), 1e-8);
      EXPECT_NEAR(square(tau), a(tau) * a(tau), 1e-8);
    }
  }
}

TEST(CollocationTest, OrderOneSelectsIntervals) {
  const KnotLayout l({0.0, 0.25, 0.5, 1.0}, {0, 0}, 1);
  const std::vector<double> sites{0.1, 0.3, 0.7};
  const Eigen::MatrixXd m = CollocationMatrix(l, sites);
  EXPECT_TRUE(m.isApprox(Eigen::MatrixXd::Identity(3, 3)));
}

TEST(CollocationTest, GrevilleSystemsAreUnisolvent) {
  std::mt19937 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const KnotLayout l = RandomLayout(rng, 2, 11, 0);
    const Eigen::MatrixXd m = GrevilleCollocationMatrix(l);
    EXPECT_LE((m.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    Eigen::VectorXd target(l.dimension());
    const std::vector<double> xi = l.GrevilleSites();
    for (int i = 0; i < l.dimension(); ++i) target[i] = std::sin(5.0 * xi[i]);
    const Eigen::VectorXd c = m.fullPivLu().solve(target);
    EXPECT_LE((m * c - target).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(CollocationTest, RejectsSiteOutsideDomain) {
  const std::vector<double> sites{1.5};
  EXPECT_THROW(CollocationMatrix(KnotLayout::Clamped(3), sites),
               std::out_of_range);
}

TEST(HullTest, Bounds) {
  const HullBounds k = ComputeHullBounds(Spline::Constant(KnotLayout::Clamped(4), 2.5));
  EXPECT_EQ(k.lower, 2.5);
  EXPECT_EQ(k.upper, 2.5);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
  c[1] = 1.0;
  const Spline bump(KnotLayout::Clamped(6), c);
  const HullBounds b = ComputeHullBounds(bump);
  EXPECT_EQ(b.lower, 0.0);
  EXPECT_EQ(b.upper, 1.0);
  for (double tau : Samples(1.0, 200)) EXPECT_LE(bump(tau), 1.0);
}

TEST(HullTest, ContainsDenseSamples) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Spline s = RandomSpline(rng, RandomLayout(rng, 1, 8, 0));
    const HullBounds h = ComputeHullBounds(s);
    for (double tau : Samples(s.layout().domain_end(), 10000)) {
      EXPECT_GE(s(tau), h.lower - 1e-12);
      EXPECT_LE(s(tau), h.upper + 1e-12);
    }
  }
}

}  // namespace
}  // namespace splinehorizon
