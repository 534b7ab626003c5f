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

#ifndef SPLINEHORIZON_NLP_H_
#define SPLINEHORIZON_NLP_H_

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace splinehorizon {

// Raised when a problem cannot be evaluated at the requested point.
class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what)
      : std::runtime_error(what) {}
};

struct NlpEvaluation {
  double objective = 0.0;
  Eigen::VectorXd gradient;
  // Equality residuals g(z); the problem is g(z) = 0.
  Eigen::VectorXd residuals;
  // d g / d z, only filled when derivatives are requested.
  Eigen::SparseMatrix<double> jacobian;
};

// Variables uniquely determined by a subset of the equality rows: the
// Jacobian block (constraints x variables) is square and nonsingular.
struct DependentPartition {
  std::vector<int> variables;
  std::vector<int> constraints;
};

//   min J(z)  s.t.  g(z) = 0,  lower <= z <= upper.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  virtual int num_variables() const = 0;
  virtual int num_constraints() const = 0;
  virtual const Eigen::VectorXd& lower_bounds() const = 0;
  virtual const Eigen::VectorXd& upper_bounds() const = 0;

  // Must be reentrant and free of side effects. Throws EvaluationError.
  virtual NlpEvaluation Evaluate(const Eigen::VectorXd& z,
                                 bool derivatives) const = 0;

  virtual std::optional<DependentPartition> partition() const {
    return std::nullopt;
  }
};

// Problem assembled from callables. Handy for small problems and tests.
class FunctionProblem : public NlpProblem {
 public:
  using Objective = std::function<double(const Eigen::VectorXd&)>;
  using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Residuals = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Jacobian = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  FunctionProblem(int num_variables, int num_constraints, Objective objective,
                  Gradient gradient, Residuals residuals, Jacobian jacobian,
                  Eigen::VectorXd lower, Eigen::VectorXd upper);

  int num_variables() const override { return n_; }
  int num_constraints() const override { return m_; }
  const Eigen::VectorXd& lower_bounds() const override { return lower_; }
  const Eigen::VectorXd& upper_bounds() const override { return upper_; }
  NlpEvaluation Evaluate(const Eigen::VectorXd& z,
                         bool derivatives) const override;

 private:
  int n_;
  int m_;
  Objective objective_;
  Gradient gradient_;
  Residuals residuals_;
  Jacobian jacobian_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

// Largest violation of lower <= z <= upper (0 when satisfied).
double MaxBoundViolation(const NlpProblem& problem, const Eigen::VectorXd& z);

}  // namespace splinehorizon

#endif  // SPLINEHORIZON_NLP_H_
