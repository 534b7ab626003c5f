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

#include "splinehorizon/kernels.h"

#include <exception>
#include <stdexcept>

#include <omp.h>

namespace splinehorizon::kernels {
namespace {

// Runs body(i) for i in [0, n). Exceptions thrown inside the OpenMP region are
// captured and rethrown on the calling thread.
template <typename Body>
void ParallelFor(int n, Backend backend, Body&& body) {
  if (backend == Backend::kSerial) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(splinehorizon_kernel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

void EvaluateSamples(const Spline& spline, std::span<const double> taus,
                     std::span<double> out, Backend backend) {
  if (taus.size() != out.size()) {
    throw std::invalid_argument("sample and output spans differ in size");
  }
  ParallelFor(static_cast<int>(taus.size()), backend,
              [&](int i) { out[i] = spline(taus[i]); });
}

std::vector<double> UniformSamples(double begin, double end, int count) {
  std::vector<double> s(count);
  if (count == 1) {
    s[0] = begin;
    return s;
  }
  for (int i = 0; i < count; ++i) {
    s[i] = begin + (end - begin) * i / (count - 1);
  }
  s.back() = end;
  return s;
}

Eigen::MatrixXd ExtrapolatedDifferenceColumns(const VectorFunction& f,
                                              const Eigen::VectorXd& x,
                                              std::span<const int> columns,
                                              std::span<const double> steps,
                                              Backend backend) {
  if (columns.size() != steps.size()) {
    throw std::invalid_argument("one step per column is required");
  }
  const int n = static_cast<int>(columns.size());
  // Central: x + {h, -h, h/2, -h/2} e_j. One-sided: x - {h, h/2, 0, 0} e_j.
  constexpr double kCentral[4] = {1.0, -1.0, 0.5, -0.5};
  constexpr double kBackward[4] = {-1.0, -0.5, 0.0, 0.0};
  std::vector<Eigen::VectorXd> values(4 * static_cast<size_t>(n));
  ParallelFor(4 * n, backend, [&](int task) {
    const int k = task / 4;
    const double h = std::abs(steps[k]);
    const double offset =
        steps[k] > 0.0 ? kCentral[task % 4] : kBackward[task % 4];
    Eigen::VectorXd xp = x;
    xp[columns[k]] += offset * h;
    values[task] = f(xp);
  });
  Eigen::MatrixXd out;
  for (int k = 0; k < n; ++k) {
    const double h = std::abs(steps[k]);
    Eigen::VectorXd wide;
    Eigen::VectorXd narrow;
    if (steps[k] > 0.0) {
      wide = (values[4 * k] - values[4 * k + 1]) / (2 * h);
      narrow = (values[4 * k + 2] - values[4 * k + 3]) / h;
      wide = (4.0 * narrow - wide) / 3.0;
    } else {
      wide = (values[4 * k + 2] - values[4 * k]) / h;
      narrow = (values[4 * k + 2] - values[4 * k + 1]) / (0.5 * h);
      wide = 2.0 * narrow - wide;
    }
    if (k == 0) out.resize(wide.size(), n);
    out.col(k) = wide;
  }
  return out;
}

Eigen::MatrixXd CentralDifferenceJacobian(const VectorFunction& f,
                                          const Eigen::VectorXd& x,
                                          double step, Backend backend) {
  const Eigen::Index rows = f(x).size();
  Eigen::MatrixXd out(rows, x.size());
  ParallelFor(static_cast<int>(x.size()), backend, [&](int j) {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp[j] += step;
    xm[j] -= step;
    out.col(j) = (f(xp) - f(xm)) / (2.0 * step);
  });
  return out;
}

}  // namespace splinehorizon::kernels
