#pragma once

// Small dense numerical kernels: polynomial real roots, null vectors and a
// Levenberg-Marquardt driver with finite-difference Jacobians.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace mvtri {

/// Real polynomial with coefficients in ascending degree order. Trailing
/// coefficients below 1e-13 of the largest magnitude are trimmed on
/// construction.
class Polynomial {
 public:
  static constexpr int kMaxDegree = 8;
  static constexpr double kTrimThreshold = 1e-13;

  /// Throws DegenerateAllZero when every coefficient vanishes and DomainError
  /// when the trimmed degree exceeds kMaxDegree.
  explicit Polynomial(std::vector<double> ascending);

  /// Monic polynomial with the given roots.
  static Polynomial from_roots(const std::vector<double>& roots);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double max_abs_coefficient() const;

  /// Horner evaluation.
  double operator()(double t) const;
  double derivative(double t) const;

 private:
  std::vector<double> coeffs_;
};

/// All real roots, ascending, with roots closer than 1e-9 merged. Computed as
/// companion-matrix eigenvalues followed by one Newton step per root.
/// A nonzero constant has no roots.
std::vector<double> real_roots(const Polynomial& p);

/// Unit vector minimizing |A v|, sign chosen so the largest-magnitude entry is
/// positive.
Eigen::VectorXd smallest_singular_vector(const Eigen::MatrixXd& A);

struct LMProblem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
  Eigen::Index num_parameters = 0;
  Eigen::Index num_residuals = 0;
};

struct LMSettings {
  int max_iterations = 100;
  double gradient_tolerance = 1e-10;
  double step_tolerance = 1e-12;
  double initial_damping = 1e-3;
};

enum class LMTermination { GradientSmall, StepSmall, MaxIterations };

struct LMOutcome {
  Eigen::VectorXd solution;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  LMTermination termination = LMTermination::MaxIterations;
  /// Costs of x0 and every accepted step, in order.
  std::vector<double> accepted_costs;
};

/// Forward-difference step used for parameter i.
inline double finite_difference_step(double x) { return 1e-7 * (1.0 + std::abs(x)); }

/// Forward-difference Jacobian. Throws NonFiniteResidual.
Eigen::MatrixXd finite_difference_jacobian(const LMProblem& problem, const Eigen::VectorXd& x);

/// Minimizes |r(x)|^2. Throws NonFiniteResidual only when r(x0) is not finite;
/// later non-finite evaluations stop the iteration and return the best point
/// seen, tagged MaxIterations.
LMOutcome lm_minimize(const LMProblem& problem, const Eigen::VectorXd& x0,
                      const LMSettings& settings = {});

}  // namespace mvtri
