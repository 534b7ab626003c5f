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
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace splinehorizon {
namespace {

// Parameters this close to the domain are clamped onto it.
constexpr double kDomainSlack = 1e-12;

[[noreturn]] void Fail(const std::string& what) {
  throw std::invalid_argument(what);
}

// Span index mu with t_mu <= tau < t_{mu+1} (kRight) or t_mu < tau <= t_{mu+1}
// (kLeft), restricted to the nonempty spans of the clamped vector.
int FindSpan(const KnotLayout& layout, double tau, Side side) {
  const std::vector<double>& t = layout.knots();
  const int p = layout.order();
  const int last = layout.dimension() - 1;
  if (side == Side::kRight) {
    if (tau >= layout.domain_end()) return last;
    const auto it = std::upper_bound(t.begin(), t.end(), tau);
    return std::clamp(static_cast<int>(it - t.begin()) - 1, p - 1, last);
  }
  if (tau <= 0.0) return p - 1;
  const auto it = std::lower_bound(t.begin(), t.end(), tau);
  return std::clamp(static_cast<int>(it - t.begin()) - 1, p - 1, last);
}

double ClampToDomain(const KnotLayout& layout, double tau) {
  const double end = layout.domain_end();
  if (tau < -kDomainSlack || tau > end + kDomainSlack * std::max(1.0, end) ||
      std::isnan(tau)) {
    std::ostringstream os;
    os << "parameter " << tau << " outside spline domain [0, " << end << "]";
    throw std::out_of_range(os.str());
  }
  return std::clamp(tau, 0.0, end);
}

}  // namespace

KnotLayout::KnotLayout(std::vector<double> breakpoints,
                       std::vector<int> continuities, int order)
    : order_(order),
      breakpoints_(std::move(breakpoints)),
      continuities_(std::move(continuities)) {
  if (order_ < 1) Fail("spline order must be at least 1");
  if (breakpoints_.size() < 2) Fail("a layout needs at least two breakpoints");
  if (breakpoints_.front() != 0.0) Fail("the first breakpoint must be 0");
  if (breakpoints_.back() > 1.0 + kDomainSlack) {
    Fail("the last breakpoint must not exceed 1");
  }
  for (size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      std::ostringstream os;
      os << "breakpoints must be strictly increasing (index " << i << ")";
      Fail(os.str());
    }
  }
  if (continuities_.size() + 2 != breakpoints_.size()) {
    Fail("one continuity per interior breakpoint is required");
  }
  for (int c : continuities_) {
    if (c < 0 || c > order_ - 1) {
      std::ostringstream os;
      os << "continuity " << c << " outside [0, " << order_ - 1 << "]";
      Fail(os.str());
    }
  }
  knots_.assign(order_, breakpoints_.front());
  for (size_t l = 0; l < continuities_.size(); ++l) {
    knots_.insert(knots_.end(), order_ - continuities_[l], breakpoints_[l + 1]);
  }
  knots_.insert(knots_.end(), order_, breakpoints_.back());
  dimension_ = static_cast<int>(knots_.size()) - order_;
}

KnotLayout KnotLayout::Clamped(int order, double end) {
  return KnotLayout({0.0, end}, {}, order);
}

KnotLayout KnotLayout::FromKnots(std::span<const double> knots, int order) {
  if (order < 1) Fail("spline order must be at least 1");
  std::vector<double> breakpoints;
  std::vector<int> multiplicity;
  for (double t : knots) {
    if (!breakpoints.empty() && t == breakpoints.back()) {
      ++multiplicity.back();
    } else {
      if (!breakpoints.empty() && t < breakpoints.back()) {
        Fail("knot vector must be non-decreasing");
      }
      breakpoints.push_back(t);
      multiplicity.push_back(1);
    }
  }
  if (breakpoints.size() < 2 || multiplicity.front() != order ||
      multiplicity.back() != order) {
    Fail("knot vector is not clamped");
  }
  std::vector<int> continuities;
  for (size_t l = 1; l + 1 < multiplicity.size(); ++l) {
    if (multiplicity[l] > order) Fail("knot multiplicity exceeds the order");
    continuities.push_back(order - multiplicity[l]);
  }
  return KnotLayout(std::move(breakpoints), std::move(continuities), order);
}

std::vector<double> KnotLayout::intervals() const {
  std::vector<double> d(breakpoints_.size() - 1);
  for (size_t g = 0; g + 1 < breakpoints_.size(); ++g) {
    d[g] = breakpoints_[g + 1] - breakpoints_[g];
  }
  return d;
}

std::vector<double> KnotLayout::GrevilleSites() const {
  if (order_ < 2) Fail("Greville sites are undefined for order 1");
  std::vector<double> sites(dimension_);
  for (int n = 0; n < dimension_; ++n) {
    const double first = knots_[n + 1];
    const double last = knots_[n + order_ - 1];
    if (first == last) {
      sites[n] = first;
      continue;
    }
    double sum = 0.0;
    for (int i = 1; i < order_; ++i) sum += knots_[n + i];
    sites[n] = std::clamp(sum / (order_ - 1), first, last);
  }
  return sites;
}

std::vector<Side> KnotLayout::GrevilleSides() const {
  std::vector<Side> sides(dimension_, Side::kRight);
  if (order_ < 2) return sides;
  for (int n = 0; n < dimension_; ++n) {
    if (knots_[n + 1] == knots_[n + order_] &&
        knots_[n + order_] < domain_end()) {
      sides[n] = Side::kLeft;
    }
  }
  return sides;
}

bool KnotLayout::Contains(double tau) const {
  return tau >= -kDomainSlack &&
         tau <= domain_end() + kDomainSlack * std::max(1.0, domain_end());
}

BasisWindow EvalBasisWindow(const KnotLayout& layout, double tau, Side side) {
  tau = ClampToDomain(layout, tau);
  const int p = layout.order();
  const std::vector<double>& t = layout.knots();
  const int mu = FindSpan(layout, tau, side);

  BasisWindow w;
  w.first = mu - p + 1;
  w.values.assign(p, 0.0);
  w.values[0] = 1.0;
  std::vector<double> left(p), right(p);
  for (int j = 1; j < p; ++j) {
    left[j] = tau - t[mu + 1 - j];
    right[j] = t[mu + j] - tau;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = w.values[r] / (right[r + 1] + left[j - r]);
      w.values[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    w.values[j] = saved;
  }
  return w;
}

Eigen::VectorXd EvalBasis(const KnotLayout& layout, double tau, Side side) {
  const BasisWindow w = EvalBasisWindow(layout, tau, side);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(layout.dimension());
  for (size_t k = 0; k < w.values.size(); ++k) b[w.first + k] = w.values[k];
  return b;
}

Spline::Spline(KnotLayout layout, Eigen::VectorXd coefficients)
    : layout_(std::move(layout)), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != layout_.dimension()) {
    std::ostringstream os;
    os << "spline has " << coefficients_.size() << " coefficients, layout needs "
       << layout_.dimension();
    Fail(os.str());
  }
}

Spline Spline::Constant(KnotLayout layout, double value) {
  const int n = layout.dimension();
  return Spline(std::move(layout), Eigen::VectorXd::Constant(n, value));
}

double Spline::operator()(double tau, Side side) const {
  const BasisWindow w = EvalBasisWindow(layout_, tau, side);
  double s = 0.0;
  for (size_t k = 0; k < w.values.size(); ++k) {
    s += coefficients_[w.first + static_cast<Eigen::Index>(k)] * w.values[k];
  }
  return s;
}

KnotLayout BuildLayout(std::vector<double> breakpoints,
                       std::vector<int> continuities, int order) {
  return KnotLayout(std::move(breakpoints), std::move(continuities), order);
}

LinearTransform DerivativeTransform(const KnotLayout& layout) {
  const int p = layout.order();
  if (p < 2) Fail("cannot differentiate an order-1 spline");
  std::vector<int> continuities;
  for (int c : layout.continuities()) {
    if (c < 1) Fail("cannot differentiate across a discontinuous breakpoint");
    continuities.push_back(c - 1);
  }
  KnotLayout target(layout.breakpoints(), std::move(continuities), p - 1);
  const std::vector<double>& t = layout.knots();
  const int rows = layout.dimension() - 1;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(2 * rows);
  for (int i = 0; i < rows; ++i) {
    const double scale = (p - 1) / (t[i + p] - t[i + 1]);
    entries.emplace_back(i, i, -scale);
    entries.emplace_back(i, i + 1, scale);
  }
  Eigen::SparseMatrix<double> m(rows, layout.dimension());
  m.setFromTriplets(entries.begin(), entries.end());
  return {layout, std::move(target), std::move(m)};
}

Spline Differentiate(const Spline& spline) {
  LinearTransform d = DerivativeTransform(spline.layout());
  Eigen::VectorXd c = d.matrix * spline.coefficients();
  return Spline(std::move(d.target), std::move(c));
}

Eigen::VectorXd IntegralWeights(const KnotLayout& layout) {
  const int p = layout.order();
  const std::vector<double>& t = layout.knots();
  Eigen::VectorXd w(layout.dimension());
  for (int l = 0; l < layout.dimension(); ++l) w[l] = (t[l + p] - t[l]) / p;
  return w;
}

double Integrate(const Spline& spline) {
  return IntegralWeights(spline.layout()).dot(spline.coefficients());
}

namespace {

struct Origin {
  double value;
  int continuity_a;  // -1 when absent from a
  int continuity_b;  // -1 when absent from b
};

std::vector<Origin> MergeInterior(const KnotLayout& a, const KnotLayout& b) {
  if (std::abs(a.domain_end() - b.domain_end()) >
      kDomainSlack * std::max(1.0, a.domain_end())) {
    Fail("cannot combine layouts with different domains");
  }
  std::vector<Origin> merged;
  const auto& za = a.breakpoints();
  const auto& zb = b.breakpoints();
  for (int l = 0; l < a.interior_count(); ++l) {
    merged.push_back({za[l + 1], a.continuities()[l], -1});
  }
  for (int l = 0; l < b.interior_count(); ++l) {
    merged.push_back({zb[l + 1], -1, b.continuities()[l]});
  }
  std::sort(merged.begin(), merged.end(),
            [](const Origin& x, const Origin& y) { return x.value < y.value; });
  for (size_t i = 1; i < merged.size(); ++i) {
    if (merged[i].value == merged[i - 1].value) {
      Fail("combined layouts share an interior breakpoint");
    }
  }
  return merged;
}

}  // namespace

KnotLayout CombineSumLayout(const KnotLayout& a, const KnotLayout& b) {
  if (a.order() != b.order()) Fail("sum layouts need equal orders");
  if (a == b) return a;
  const std::vector<Origin> merged = MergeInterior(a, b);
  std::vector<double> breakpoints{0.0};
  std::vector<int> continuities;
  for (const Origin& o : merged) {
    breakpoints.push_back(o.value);
    continuities.push_back(o.continuity_a >= 0 ? o.continuity_a
                                               : o.continuity_b);
  }
  breakpoints.push_back(a.domain_end());
  return KnotLayout(std::move(breakpoints), std::move(continuities), a.order());
}

KnotLayout CombineProductLayout(const KnotLayout& a, const KnotLayout& b) {
  const int order = a.order() + b.order() - 1;
  if (a.breakpoints() == b.breakpoints() &&
      a.continuities() == b.continuities()) {
    return KnotLayout(a.breakpoints(), a.continuities(), order);
  }
  const std::vector<Origin> merged = MergeInterior(a, b);
  std::vector<double> breakpoints{0.0};
  std::vector<int> continuities;
  for (const Origin& o : merged) {
    breakpoints.push_back(o.value);
    continuities.push_back(o.continuity_a >= 0 ? o.continuity_a
                                               : o.continuity_b);
  }
  breakpoints.push_back(a.domain_end());
  return KnotLayout(std::move(breakpoints), std::move(continuities), order);
}

Eigen::MatrixXd CollocationMatrix(const KnotLayout& layout,
                                  std::span<const double> sites,
                                  std::span<const Side> sides) {
  if (!sides.empty() && sides.size() != sites.size()) {
    Fail("one side per collocation site is required");
  }
  Eigen::MatrixXd m =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sites.size()),
                            layout.dimension());
  for (size_t r = 0; r < sites.size(); ++r) {
    const Side side = sides.empty() ? Side::kRight : sides[r];
    const BasisWindow w = EvalBasisWindow(layout, sites[r], side);
    for (size_t k = 0; k < w.values.size(); ++k) {
      m(static_cast<Eigen::Index>(r), w.first + static_cast<Eigen::Index>(k)) =
          w.values[k];
    }
  }
  return m;
}

Eigen::MatrixXd GrevilleCollocationMatrix(const KnotLayout& layout) {
  const std::vector<double> sites = layout.GrevilleSites();
  const std::vector<Side> sides = layout.GrevilleSides();
  return CollocationMatrix(layout, sites, sides);
}

Spline Sum(const Spline& a, const Spline& b) {
  const KnotLayout layout = CombineSumLayout(a.layout(), b.layout());
  return InterpolateAtGreville(
      layout, [&](double s, Side side) { return a(s, side) + b(s, side); });
}

Spline Product(const Spline& a, const Spline& b) {
  const KnotLayout layout = CombineProductLayout(a.layout(), b.layout());
  return InterpolateAtGreville(
      layout, [&](double s, Side side) { return a(s, side) * b(s, side); });
}

Spline InsertKnot(const Spline& spline, double tau) {
  const KnotLayout& layout = spline.layout();
  const int p = layout.order();
  const std::vector<double>& t = layout.knots();
  if (!(tau > 0.0 && tau < layout.domain_end())) {
    Fail("knot insertion requires a parameter strictly inside the domain");
  }
  const int multiplicity =
      static_cast<int>(std::count(t.begin(), t.end(), tau));
  if (multiplicity + 1 > p) Fail("knot multiplicity would exceed the order");

  const int mu = FindSpan(layout, tau, Side::kRight);
  const int degree = p - 1;
  const Eigen::VectorXd& c = spline.coefficients();
  const int n = layout.dimension();
  Eigen::VectorXd out(n + 1);
  for (int i = 0; i <= mu - degree; ++i) out[i] = c[i];
  for (int i = std::max(mu - degree + 1, 0); i <= mu; ++i) {
    const double alpha = (tau - t[i]) / (t[i + degree] - t[i]);
    out[i] = alpha * c[i] + (1.0 - alpha) * c[i - 1];
  }
  for (int i = mu + 1; i <= n; ++i) out[i] = c[i - 1];

  std::vector<double> knots = t;
  knots.insert(knots.begin() + mu + 1, tau);
  return Spline(KnotLayout::FromKnots(knots, p), std::move(out));
}

Spline ExtractTail(const Spline& spline, double offset) {
  const KnotLayout& layout = spline.layout();
  const double end = layout.domain_end();
  if (!(offset > 0.0 && offset < end)) {
    Fail("tail extraction requires an offset strictly inside the domain");
  }
  // Snap onto an existing breakpoint closer than roundoff.
  for (double z : layout.breakpoints()) {
    if (std::abs(z - offset) <= kDomainSlack) offset = z;
  }
  if (offset >= end) Fail("tail extraction offset reaches the domain end");

  const int p = layout.order();
  Spline refined = spline;
  int multiplicity = static_cast<int>(
      std::count(layout.knots().begin(), layout.knots().end(), offset));
  while (multiplicity < p) {
    refined = InsertKnot(refined, offset);
    ++multiplicity;
  }
  const std::vector<double>& t = refined.layout().knots();
  const int first = static_cast<int>(
      std::lower_bound(t.begin(), t.end(), offset) - t.begin());
  std::vector<double> knots(t.begin() + first, t.end());
  for (double& k : knots) k -= offset;
  knots.front() = 0.0;
  const int n = refined.layout().dimension() - first;
  Eigen::VectorXd c = refined.coefficients().tail(n);
  return Spline(KnotLayout::FromKnots(knots, p), std::move(c));
}

HullBounds ComputeHullBounds(const Spline& spline) {
  return {spline.coefficients().minCoeff(), spline.coefficients().maxCoeff()};
}

}  // namespace splinehorizon
