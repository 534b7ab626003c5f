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

// Reference computations for the tests. None of these call into the library
// except to read plain data (knots, coefficients).

#ifndef SPLINEHORIZON_TESTS_ORACLES_H_
#define SPLINEHORIZON_TESTS_ORACLES_H_

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Textbook recursive Cox-de Boor definition with half-open spans. The last
// nonempty span is closed on the right.
inline double Basis(const std::vector<double>& t, int i, int order, double x) {
  if (order == 1) {
    const double end = t.back();
    if (t[i] <= x && x < t[i + 1]) return 1.0;
    if (x == end && t[i] < t[i + 1] && t[i + 1] == end) return 1.0;
    return 0.0;
  }
  double value = 0.0;
  const double d1 = t[i + order - 1] - t[i];
  const double d2 = t[i + order] - t[i + 1];
  if (d1 > 0.0) value += (x - t[i]) / d1 * Basis(t, i, order - 1, x);
  if (d2 > 0.0) value += (t[i + order] - x) / d2 * Basis(t, i + 1, order - 1, x);
  return value;
}

inline double Evaluate(const std::vector<double>& t, int order,
                       const Eigen::VectorXd& c, double x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    s += c[i] * Basis(t, static_cast<int>(i), order, x);
  }
  return s;
}

// de Boor's algorithm on the span containing x. Spans are half-open except
// the last nonempty one.
inline double DeBoor(const std::vector<double>& t, int order,
                     const Eigen::VectorXd& c, double x) {
  const int n = static_cast<int>(c.size());
  int k = order - 1;
  while (k + 1 < n && t[k + 1] <= x) ++k;
  std::vector<double> d(order);
  for (int j = 0; j < order; ++j) d[j] = c[k - order + 1 + j];
  for (int r = 1; r < order; ++r) {
    for (int j = order - 1; j >= r; --j) {
      const int i = k - order + 1 + j;
      const double den = t[i + order - r] - t[i];
      const double a = den > 0.0 ? (x - t[i]) / den : 0.0;
      d[j] = (1.0 - a) * d[j - 1] + a * d[j];
    }
  }
  return d[order - 1];
}

// Adaptive Simpson quadrature.
inline double Integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12, int depth = 40) {
  std::function<double(double, double, double, double, double, double, int)>
      step = [&](double lo, double hi, double flo, double fmid, double fhi,
                 double whole, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
          return left + right + (left + right - whole) / 15.0;
        }
        return step(lo, mid, flo, flm, fmid, left, d - 1) +
               step(mid, hi, fmid, frm, fhi, right, d - 1);
      };
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return step(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), depth);
}

// Polynomial through (x_k, y_k) in monomial form in (x - origin) / scale,
// evaluated by Horner's rule.
class LocalPolynomial {
 public:
  LocalPolynomial(const std::vector<double>& x, const std::vector<double>& y,
                  double origin, double scale)
      : origin_(origin), scale_(scale) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd v(n, n);
    Eigen::VectorXd rhs(n);
    for (int r = 0; r < n; ++r) {
      double power = 1.0;
      for (int c = 0; c < n; ++c) {
        v(r, c) = power;
        power *= (x[r] - origin) / scale;
      }
      rhs[r] = y[r];
    }
    coefficients_ = v.fullPivLu().solve(rhs);
  }

  double operator()(double x) const {
    double s = 0.0;
    for (Eigen::Index k = coefficients_.size() - 1; k >= 0; --k) {
      s = s * ((x - origin_) / scale_) + coefficients_[k];
    }
    return s;
  }

 private:
  double origin_;
  double scale_;
  Eigen::VectorXd coefficients_;
};

// Minimum-jerk quintic on [0, d] between (p0, v0, a0) and (p1, v1, a1).
// Returns monomial coefficients a_0..a_5.
inline Eigen::VectorXd MinimumJerkQuintic(double p0, double v0, double a0,
                                          double p1, double v1, double a1,
                                          double d) {
  Eigen::VectorXd c(6);
  c[0] = p0;
  c[1] = v0;
  c[2] = 0.5 * a0;
  Eigen::Matrix3d m;
  m << std::pow(d, 3), std::pow(d, 4), std::pow(d, 5), 3 * d * d,
      4 * std::pow(d, 3), 5 * std::pow(d, 4), 6 * d, 12 * d * d,
      20 * std::pow(d, 3);
  Eigen::Vector3d rhs(p1 - (p0 + v0 * d + 0.5 * a0 * d * d), v1 - (v0 + a0 * d),
                      a1 - a0);
  c.tail(3) = m.fullPivLu().solve(rhs);
  return c;
}

}  // namespace oracle

#endif  // SPLINEHORIZON_TESTS_ORACLES_H_
