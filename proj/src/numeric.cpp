#include "mvtri/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "mvtri/error.hpp"

namespace mvtri {

Polynomial::Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) {
  double max_abs = 0.0;
  for (double c : coeffs_) {
    if (!std::isfinite(c)) {
      throw Error(ErrorCode::DomainError, "polynomial coefficient is not finite");
    }
    max_abs = std::max(max_abs, std::abs(c));
  }
  if (max_abs == 0.0) {
    throw Error(ErrorCode::DegenerateAllZero, "all polynomial coefficients are zero");
  }
  while (coeffs_.size() > 1 && std::abs(coeffs_.back()) <= kTrimThreshold * max_abs) {
    coeffs_.pop_back();
  }
  if (degree() > kMaxDegree) {
    throw Error(ErrorCode::DomainError, "polynomial degree exceeds " + std::to_string(kMaxDegree));
  }
}

Polynomial Polynomial::from_roots(const std::vector<double>& roots) {
  std::vector<double> c{1.0};
  for (double r : roots) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = std::move(next);
  }
  return Polynomial(std::move(c));
}

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

double Polynomial::operator()(double t) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

double Polynomial::derivative(double t) const {
  double acc = 0.0;
  for (std::size_t i = coeffs_.size(); i-- > 1;) acc = acc * t + static_cast<double>(i) * coeffs_[i];
  return acc;
}

namespace {

// Parlett-Reinsch diagonal balancing with powers of two; eigenvalues are
// unchanged and rounding error of the subsequent QR iteration is reduced.
void balance(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  constexpr double radix = 2.0;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      double g = r / radix;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

}  // namespace

std::vector<double> real_roots(const Polynomial& p) {
  const std::vector<double>& c = p.coefficients();
  std::vector<double> candidates;

  // Exact zero roots are factored out so the companion matrix stays nonsingular.
  std::size_t low = 0;
  while (low + 1 < c.size() && c[low] == 0.0) ++low;
  if (low > 0) candidates.push_back(0.0);

  const int n = static_cast<int>(c.size() - 1 - low);
  if (n >= 1) {
    const double lead = c.back();
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -c[low + i] / lead;
    balance(companion);

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    const Eigen::VectorXcd eig = solver.eigenvalues();
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
      const double re = eig[i].real();
      if (std::abs(eig[i].imag()) <= 1e-8 * (1.0 + std::abs(re))) candidates.push_back(re);
    }
  }

  for (double& r : candidates) {
    const double d = p.derivative(r);
    if (d == 0.0) continue;
    const double polished = r - p(r) / d;
    if (std::isfinite(polished) && std::abs(p(polished)) <= std::abs(p(r))) r = polished;
  }

  std::sort(candidates.begin(), candidates.end());
  std::vector<double> roots;
  for (double r : candidates) {
    if (roots.empty() || r - roots.back() > 1e-9) roots.push_back(r);
  }
  return roots;
}

Eigen::VectorXd smallest_singular_vector(const Eigen::MatrixXd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  Eigen::VectorXd v = svd.matrixV().col(A.cols() - 1);
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0) v = -v;
  return v;
}

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

Eigen::VectorXd evaluate(const LMProblem& problem, const Eigen::VectorXd& x) {
  Eigen::VectorXd r = problem.residual(x);
  if (!all_finite(r)) {
    throw Error(ErrorCode::NonFiniteResidual, "residual is not finite");
  }
  return r;
}

}  // namespace

Eigen::MatrixXd finite_difference_jacobian(const LMProblem& problem, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r0 = evaluate(problem, x);
  Eigen::MatrixXd J(r0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = finite_difference_step(x[i]);
    xp[i] = x[i] + h;
    // Actual representable step.
    const double step = xp[i] - x[i];
    J.col(i) = (evaluate(problem, xp) - r0) / step;
    xp[i] = x[i];
  }
  return J;
}

LMOutcome lm_minimize(const LMProblem& problem, const Eigen::VectorXd& x0,
                      const LMSettings& settings) {
  LMOutcome out;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = evaluate(problem, x);
  double cost = r.squaredNorm();
  out.initial_cost = cost;
  out.accepted_costs.push_back(cost);

  auto finish = [&](LMTermination why) {
    out.solution = x;
    out.final_cost = cost;
    out.termination = why;
    return out;
  };

  double lambda = settings.initial_damping;
  const Eigen::Index n = x.size();

  while (out.iterations < settings.max_iterations) {
    Eigen::MatrixXd J;
    try {
      J = finite_difference_jacobian(problem, x);
    } catch (const Error&) {
      return finish(LMTermination::MaxIterations);
    }
    const Eigen::VectorXd gradient = J.transpose() * r;
    if (gradient.lpNorm<Eigen::Infinity>() <= settings.gradient_tolerance) {
      return finish(LMTermination::GradientSmall);
    }
    // Marquardt scaling of the damping term; floored so flat directions still
    // receive some regularization.
    const Eigen::VectorXd scale =
        J.colwise().squaredNorm().transpose().cwiseMax(1e-12).cwiseSqrt();

    while (true) {
      ++out.iterations;
      Eigen::MatrixXd augmented(J.rows() + n, n);
      augmented.topRows(J.rows()) = J;
      augmented.bottomRows(n) = (std::sqrt(lambda) * scale).asDiagonal();
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(J.rows() + n);
      rhs.head(J.rows()) = -r;
      const Eigen::VectorXd step = augmented.colPivHouseholderQr().solve(rhs);

      if (step.norm() <= settings.step_tolerance * (x.norm() + settings.step_tolerance)) {
        return finish(LMTermination::StepSmall);
      }
      const Eigen::VectorXd candidate = x + step;
      const Eigen::VectorXd r_new = problem.residual(candidate);
      if (!all_finite(r_new)) {
        return finish(LMTermination::MaxIterations);
      }
      const double cost_new = r_new.squaredNorm();
      if (cost_new < cost) {
        x = candidate;
        r = r_new;
        cost = cost_new;
        out.accepted_costs.push_back(cost);
        lambda = std::max(lambda / 10.0, 1e-15);
        break;
      }
      lambda = std::min(lambda * 10.0, 1e15);
      if (out.iterations >= settings.max_iterations) {
        return finish(LMTermination::MaxIterations);
      }
    }
  }
  return finish(LMTermination::MaxIterations);
}

}  // namespace mvtri
