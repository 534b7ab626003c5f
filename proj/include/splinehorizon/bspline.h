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

#ifndef SPLINEHORIZON_BSPLINE_H_
#define SPLINEHORIZON_BSPLINE_H_

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace splinehorizon {

// Which one-sided limit to use when a parameter coincides with a knot.
// kRight is the default de Boor convention (right-continuous, left-closed at
// the right end of the domain); kLeft mirrors it.
enum class Side { kRight, kLeft };

// Clamped knot layout over [0, end]. Interior breakpoint l is repeated
// order - continuity_l times; both ends are repeated order times. Continuity c
// means the spline and its first c - 1 derivatives are continuous.
//
// Immutable once constructed.
class KnotLayout {
 public:
  // Throws std::invalid_argument when breakpoints are not strictly increasing,
  // do not start at 0, end beyond 1, or when a continuity is outside
  // [0, order - 1], or order < 1.
  KnotLayout(std::vector<double> breakpoints, std::vector<int> continuities,
             int order);

  // Layout with no interior breakpoints over [0, end].
  static KnotLayout Clamped(int order, double end = 1.0);

  // Reconstructs a layout from a clamped knot vector.
  static KnotLayout FromKnots(std::span<const double> knots, int order);

  int order() const { return order_; }
  int dimension() const { return dimension_; }
  int interior_count() const { return static_cast<int>(continuities_.size()); }
  double domain_end() const { return breakpoints_.back(); }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<int>& continuities() const { return continuities_; }
  const std::vector<double>& knots() const { return knots_; }
  std::vector<double> intervals() const;

  // Averages of order - 1 consecutive knots, one per coefficient. Throws
  // std::invalid_argument for order 1.
  std::vector<double> GrevilleSites() const;

  // Side on which each Greville site must be evaluated so that the site lies
  // in the support of its own basis function. Only differs from kRight at
  // breakpoints of full multiplicity (continuity 0).
  std::vector<Side> GrevilleSides() const;

  bool Contains(double tau) const;

  friend bool operator==(const KnotLayout& a, const KnotLayout& b) {
    return a.order_ == b.order_ && a.breakpoints_ == b.breakpoints_ &&
           a.continuities_ == b.continuities_;
  }

 private:
  int order_;
  std::vector<double> breakpoints_;
  std::vector<int> continuities_;
  std::vector<double> knots_;
  int dimension_;
};

// The nonzero window of the basis at one parameter: values[k] = B_{first+k}.
struct BasisWindow {
  int first = 0;
  std::vector<double> values;
};

// Cox-de Boor evaluation of the order nonzero basis functions at tau.
// Throws std::out_of_range when tau lies outside the domain.
BasisWindow EvalBasisWindow(const KnotLayout& layout, double tau,
                            Side side = Side::kRight);

// Dense vector of all dimension() basis values at tau.
Eigen::VectorXd EvalBasis(const KnotLayout& layout, double tau,
                          Side side = Side::kRight);

class Spline {
 public:
  Spline(KnotLayout layout, Eigen::VectorXd coefficients);

  // Spline with every coefficient equal to value.
  static Spline Constant(KnotLayout layout, double value);

  const KnotLayout& layout() const { return layout_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

  double operator()(double tau, Side side = Side::kRight) const;

 private:
  KnotLayout layout_;
  Eigen::VectorXd coefficients_;
};

// Coefficient map between two layouts: target = matrix * source.
struct LinearTransform {
  KnotLayout source;
  KnotLayout target;
  Eigen::SparseMatrix<double> matrix;
};

KnotLayout BuildLayout(std::vector<double> breakpoints,
                       std::vector<int> continuities, int order);

// Time derivative. The target layout has order - 1 and every continuity
// lowered by one. Requires order >= 2 and all continuities >= 1.
LinearTransform DerivativeTransform(const KnotLayout& layout);

Spline Differentiate(const Spline& spline);

// Weights w with integral over the domain of S equal to w . c.
Eigen::VectorXd IntegralWeights(const KnotLayout& layout);

double Integrate(const Spline& spline);

// Layout holding a + b for splines on a and b. Requires equal order and either
// identical layouts or pairwise distinct interior breakpoints.
KnotLayout CombineSumLayout(const KnotLayout& a, const KnotLayout& b);

// Layout holding a * b: order a + b - 1, breakpoint continuities taken from
// the operand they originate from.
KnotLayout CombineProductLayout(const KnotLayout& a, const KnotLayout& b);

// Entry (r, l) = B_l(sites[r]). `sides` may be empty (all kRight).
Eigen::MatrixXd CollocationMatrix(const KnotLayout& layout,
                                  std::span<const double> sites,
                                  std::span<const Side> sides = {});

// Square collocation matrix at the layout's own Greville sites.
Eigen::MatrixXd GrevilleCollocationMatrix(const KnotLayout& layout);

// Greville interpolant of f on layout.
template <typename Fn>
Spline InterpolateAtGreville(const KnotLayout& layout, Fn&& f) {
  const std::vector<double> sites = layout.GrevilleSites();
  const std::vector<Side> sides = layout.GrevilleSides();
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(sites.size()));
  for (size_t i = 0; i < sites.size(); ++i) {
    rhs[static_cast<Eigen::Index>(i)] = f(sites[i], sides[i]);
  }
  Eigen::VectorXd coefficients =
      GrevilleCollocationMatrix(layout).partialPivLu().solve(rhs);
  return Spline(layout, std::move(coefficients));
}

Spline Sum(const Spline& a, const Spline& b);
Spline Product(const Spline& a, const Spline& b);

// Boehm insertion of one knot. The result represents the same function.
// Throws std::invalid_argument at the domain boundary or when the resulting
// multiplicity would exceed the order.
Spline InsertKnot(const Spline& spline, double tau);

// Spline s over [0, end - offset] with s(sigma) = spline(sigma + offset).
// Breakpoints <= offset are dropped.
Spline ExtractTail(const Spline& spline, double offset);

struct HullBounds {
  double lower;
  double upper;
};

HullBounds ComputeHullBounds(const Spline& spline);

}  // namespace splinehorizon

#endif  // SPLINEHORIZON_BSPLINE_H_
