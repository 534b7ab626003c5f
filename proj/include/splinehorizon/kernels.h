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

// Data-parallel inner loops. Every kernel has a serial reference path and an
// OpenMP path; both produce bitwise identical results because iterations are
// independent and write disjoint outputs.

#ifndef SPLINEHORIZON_KERNELS_H_
#define SPLINEHORIZON_KERNELS_H_

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "splinehorizon/bspline.h"

namespace splinehorizon::kernels {

enum class Backend { kSerial, kOpenMP };

// out[i] = spline(taus[i]).
void EvaluateSamples(const Spline& spline, std::span<const double> taus,
                     std::span<double> out, Backend backend = Backend::kOpenMP);

std::vector<double> UniformSamples(double begin, double end, int count);

using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Richardson-extrapolated central differences
// (4 D(h_k / 2) - D(h_k)) / 3 with D(h) = (f(x + h e_j) - f(x - h e_j)) / 2h,
// for each j = columns[k], fourth-order accurate. A negative step selects the
// one-sided backward stencil 2 B(|h_k| / 2) - B(|h_k|), second-order
// accurate, which never evaluates f beyond x_j. f must be reentrant when the
// OpenMP backend is used.
Eigen::MatrixXd ExtrapolatedDifferenceColumns(
    const VectorFunction& f, const Eigen::VectorXd& x,
    std::span<const int> columns, std::span<const double> steps,
    Backend backend = Backend::kOpenMP);

// Full central-difference Jacobian (f(x + h e_j) - f(x - h e_j)) / 2h.
Eigen::MatrixXd CentralDifferenceJacobian(const VectorFunction& f,
                                          const Eigen::VectorXd& x,
                                          double step,
                                          Backend backend = Backend::kOpenMP);

}  // namespace splinehorizon::kernels

#endif  // SPLINEHORIZON_KERNELS_H_
