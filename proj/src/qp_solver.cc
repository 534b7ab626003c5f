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

#include "splinehorizon/qp_solver.h"

#include <cmath>
#include <limits>

namespace splinehorizon {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Factorization state of the dual method: J = L^{-T} Q with the first iq
// columns of Q spanning the active constraint normals, R upper triangular.
class ActiveSet {
 public:
  ActiveSet(const Eigen::MatrixXd& j0)
      : n_(static_cast<int>(j0.rows())),
        j_(j0),
        r_(Eigen::MatrixXd::Zero(n_, n_)),
        u_(Eigen::VectorXd::Zero(n_ + 1)),
        members_(n_ + 1, -1) {}

  int size() const { return iq_; }
  int member(int k) const { return members_[k]; }
  double& multiplier(int k) { return u_[k]; }

  void Directions(const Eigen::VectorXd& normal, Eigen::VectorXd& d,
                  Eigen::VectorXd& z, Eigen::VectorXd& r) const {
    d = j_.transpose() * normal;
    z = j_.rightCols(n_ - iq_) * d.tail(n_ - iq_);
    r = r_.topLeftCorner(iq_, iq_).triangularView<Eigen::Upper>().solve(
        d.head(iq_));
  }

  void SetPending(int constraint) {
    members_[iq_] = constraint;
    u_[iq_] = 0.0;
  }

  void ShiftMultipliers(double t, const Eigen::VectorXd& r) {
    u_.head(iq_) -= t * r;
    u_[iq_] += t;
  }

  // Appends the pending constraint. Returns false when its normal is linearly
  // dependent on the active ones.
  bool Add(Eigen::VectorXd d) {
    for (int j = n_ - 1; j >= iq_ + 1; --j) {
      double cc = d[j - 1];
      double ss = d[j];
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      d[j] = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        d[j - 1] = -h;
      } else {
        d[j - 1] = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = 0; k < n_; ++k) {
        const double t1 = j_(k, j - 1);
        const double t2 = j_(k, j);
        j_(k, j - 1) = t1 * cc + t2 * ss;
        j_(k, j) = xny * (t1 + j_(k, j - 1)) - t2;
      }
    }
    ++iq_;
    r_.col(iq_ - 1).head(iq_) = d.head(iq_);
    const double diag = std::abs(d[iq_ - 1]);
    if (diag <= std::numeric_limits<double>::epsilon() * r_norm_) {
      --iq_;
      return false;
    }
    r_norm_ = std::max(r_norm_, diag);
    return true;
  }

  void Remove(int constraint) {
    int qq = -1;
    for (int k = 0; k < iq_; ++k) {
      if (members_[k] == constraint) {
        qq = k;
        break;
      }
    }
    if (qq < 0) return;
    for (int i = qq; i < iq_ - 1; ++i) {
      members_[i] = members_[i + 1];
      u_[i] = u_[i + 1];
      r_.col(i) = r_.col(i + 1);
    }
    members_[iq_ - 1] = members_[iq_];
    u_[iq_ - 1] = u_[iq_];
    members_[iq_] = -1;
    u_[iq_] = 0.0;
    r_.col(iq_ - 1).setZero();
    --iq_;
    for (int j = qq; j < iq_; ++j) {
      double cc = r_(j, j);
      double ss = r_(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      r_(j + 1, j) = 0.0;
      if (cc < 0.0) {
        r_(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        r_(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = j + 1; k < iq_; ++k) {
        const double t1 = r_(j, k);
        const double t2 = r_(j + 1, k);
        r_(j, k) = t1 * cc + t2 * ss;
        r_(j + 1, k) = xny * (t1 + r_(j, k)) - t2;
      }
      for (int k = 0; k < n_; ++k) {
        const double t1 = j_(k, j);
        const double t2 = j_(k, j + 1);
        j_(k, j) = t1 * cc + t2 * ss;
        j_(k, j + 1) = xny * (j_(k, j) + t1) - t2;
      }
    }
  }

 private:
  int n_;
  int iq_ = 0;
  double r_norm_ = 1.0;
  Eigen::MatrixXd j_;
  Eigen::MatrixXd r_;
  Eigen::VectorXd u_;
  std::vector<int> members_;
};

}  // namespace

QpSolution SolveQp(const QuadraticProgram& qp, int max_iterations) {
  const int n = static_cast<int>(qp.gradient.size());
  const int me = static_cast<int>(qp.eq_rhs.size());
  const int mi = static_cast<int>(qp.in_rhs.size());
  QpSolution out;
  out.eq_multipliers = Eigen::VectorXd::Zero(me);
  out.in_multipliers = Eigen::VectorXd::Zero(mi);

  Eigen::LLT<Eigen::MatrixXd> llt(qp.hessian);
  if (llt.info() != Eigen::Success) {
    out.status = QpStatus::kNotConvex;
    return out;
  }
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::MatrixXd j0 = l.transpose().triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(n, n));

  Eigen::VectorXd x = -llt.solve(qp.gradient);
  ActiveSet active(j0);
  Eigen::VectorXd d, z, r;

  for (int i = 0; i < me; ++i) {
    const Eigen::VectorXd normal = qp.eq_matrix.row(i).transpose();
    active.Directions(normal, d, z, r);
    double t = 0.0;
    const double zn = z.dot(normal);
    if (std::abs(z.dot(z)) > std::numeric_limits<double>::epsilon()) {
      t = (qp.eq_rhs[i] - normal.dot(x)) / zn;
    }
    x += t * z;
    active.SetPending(i);
    active.ShiftMultipliers(t, r);
    if (!active.Add(d)) {
      out.status = QpStatus::kInfeasible;
      out.x = x;
      return out;
    }
  }

  std::vector<char> is_active(mi, 0);
  auto violation_tolerance = [&](int k) {
    return 1e-11 * (1.0 + std::abs(qp.in_rhs[k]) +
                    qp.in_matrix.row(k).cwiseAbs().dot(x.cwiseAbs()));
  };

  int iter = 0;
  while (true) {
    if (++iter > max_iterations) {
      out.status = QpStatus::kIterationLimit;
      out.x = x;
      return out;
    }
    int p = -1;
    double most_violated = 0.0;
    if (mi > 0) {
      const Eigen::VectorXd s = qp.in_matrix * x - qp.in_rhs;
      for (int k = 0; k < mi; ++k) {
        if (is_active[k]) continue;
        const double scaled = s[k] / std::max(1.0, qp.in_matrix.row(k).norm());
        if (s[k] < -violation_tolerance(k) && scaled < most_violated) {
          most_violated = scaled;
          p = k;
        }
      }
    }
    if (p < 0) break;

    const Eigen::VectorXd normal = qp.in_matrix.row(p).transpose();
    double slack = normal.dot(x) - qp.in_rhs[p];
    active.SetPending(me + p);
    while (true) {
      active.Directions(normal, d, z, r);
      double t1 = kInf;
      int leaving = -1;
      for (int k = me; k < active.size(); ++k) {
        // Inequality members only: equality multipliers are unrestricted.
        if (active.member(k) < me) continue;
        if (r[k] > 0.0) {
          const double ratio = active.multiplier(k) / r[k];
          if (ratio < t1) {
            t1 = ratio;
            leaving = active.member(k);
          }
        }
      }
      const double zn = z.dot(normal);
      double t2 = kInf;
      if (std::abs(z.dot(z)) > std::numeric_limits<double>::epsilon() &&
          zn > 0.0) {
        t2 = -slack / zn;
      }
      const double t = std::min(t1, t2);
      if (t == kInf) {
        out.status = QpStatus::kInfeasible;
        out.x = x;
        return out;
      }
      if (t2 == kInf) {
        active.ShiftMultipliers(t, r);
        active.Remove(leaving);
        is_active[leaving - me] = 0;
        continue;
      }
      x += t * z;
      active.ShiftMultipliers(t, r);
      if (t == t2) {
        if (!active.Add(d)) {
          out.status = QpStatus::kInfeasible;
          out.x = x;
          return out;
        }
        is_active[p] = 1;
        break;
      }
      active.Remove(leaving);
      is_active[leaving - me] = 0;
      slack = normal.dot(x) - qp.in_rhs[p];
      if (++iter > max_iterations) {
        out.status = QpStatus::kIterationLimit;
        out.x = x;
        return out;
      }
    }
  }

  out.status = QpStatus::kOptimal;
  out.x = x;
  out.iterations = iter;
  for (int k = 0; k < active.size(); ++k) {
    const int c = active.member(k);
    if (c < me) {
      out.eq_multipliers[c] = active.multiplier(k);
    } else {
      out.in_multipliers[c - me] = active.multiplier(k);
      out.active_inequalities.push_back(c - me);
    }
  }
  out.objective = 0.5 * x.dot(qp.hessian * x) + qp.gradient.dot(x);
  return out;
}

}  // namespace splinehorizon
