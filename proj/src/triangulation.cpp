#include "mvtri/triangulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "mvtri/error.hpp"

namespace mvtri {

std::string_view to_string(TriangulationMethod method) {
  switch (method) {
    case TriangulationMethod::Linear: return "linear";
    case TriangulationMethod::TwoViewOptimal: return "two-opt";
    case TriangulationMethod::NViewLM: return "nview-lm";
  }
  return "unknown";
}

TriangulationMethod parse_method(std::string_view name) {
  if (name == "linear") return TriangulationMethod::Linear;
  if (name == "two-opt") return TriangulationMethod::TwoViewOptimal;
  if (name == "nview-lm") return TriangulationMethod::NViewLM;
  throw Error(ErrorCode::ConfigError, "unknown method '" + std::string(name) + "'");
}

void validate_track(std::span<const ProjectionMatrix> views, const Track& track,
                    std::size_t min_observations) {
  if (track.observations.size() < min_observations) {
    throw Error(ErrorCode::InsufficientObservations,
                "track " + std::to_string(track.point_id) + " has " +
                    std::to_string(track.observations.size()) + " observations");
  }
  int previous = -1;
  for (const auto& obs : track.observations) {
    if (obs.view_index < 0 || static_cast<std::size_t>(obs.view_index) >= views.size()) {
      throw Error(ErrorCode::InvalidTrack, "view index " + std::to_string(obs.view_index) +
                                               " out of range in track " +
                                               std::to_string(track.point_id));
    }
    if (obs.view_index <= previous) {
      throw Error(ErrorCode::InvalidTrack, "view indices must be strictly increasing in track " +
                                               std::to_string(track.point_id));
    }
    previous = obs.view_index;
  }
}

Eigen::VectorXd reprojection_residual(std::span<const ProjectionMatrix> views, const Track& track,
                                      const Vec3& point) {
  Eigen::VectorXd r(2 * static_cast<Eigen::Index>(track.observations.size()));
  Eigen::Index k = 0;
  for (const auto& obs : track.observations) {
    const Vec2 d = project_pixel(views[obs.view_index], point) - obs.pixel.euclidean();
    r[k++] = d.x();
    r[k++] = d.y();
  }
  return r;
}

double geometric_error(std::span<const ProjectionMatrix> views, const HomoPoint3& point,
                       const Track& track) {
  if (!point.is_finite()) {
    throw Error(ErrorCode::DegeneratePoint, "geometric error of a point at infinity");
  }
  return reprojection_residual(views, track, point.euclidean()).squaredNorm();
}

namespace {

void fill_residuals(std::span<const ProjectionMatrix> views, const Track& track,
                    TriangulationResult& result) {
  const Eigen::VectorXd r = reprojection_residual(views, track, result.point.euclidean());
  result.per_view_residual.clear();
  for (Eigen::Index i = 0; i < r.size(); i += 2) {
    result.per_view_residual.push_back(std::hypot(r[i], r[i + 1]));
  }
  result.geometric_error = r.squaredNorm();
}

}  // namespace

TriangulationResult triangulate_linear(std::span<const ProjectionMatrix> views, const Track& track) {
  validate_track(views, track);

  // Per observation, translate the image so the observed pixel sits at the
  // origin and scale the resulting camera to unit norm. The first two rows of
  // the translated camera must then annihilate X.
  const auto m = static_cast<Eigen::Index>(track.observations.size());
  Eigen::MatrixXd A(2 * m, 4);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& obs = track.observations[i];
    const Mat34& P = views[obs.view_index].P;
    Mat34 Q = P;
    Q.row(0) -= obs.pixel.u() * P.row(2);
    Q.row(1) -= obs.pixel.v() * P.row(2);
    Q /= Q.norm();
    A.row(2 * i) = Q.row(0);
    A.row(2 * i + 1) = Q.row(1);
  }
  const Eigen::VectorXd X = smallest_singular_vector(A);

  TriangulationResult result;
  result.method = TriangulationMethod::Linear;
  if (std::abs(X[3]) < 1e-12) {
    result.point = HomoPoint3(Vec4(X));
    result.failure = TriangulationFailure::PointAtInfinity;
    result.converged = false;
    result.geometric_error = std::numeric_limits<double>::infinity();
    return result;
  }
  result.point = HomoPoint3(Vec4(X / X[3]));
  result.converged = true;
  fill_residuals(views, track, result);
  return result;
}

double PencilCost::operator()(double t) const {
  const double at_b = a * t + b;
  const double ct_d = c * t + d;
  const double denom = at_b * at_b + f2 * f2 * ct_d * ct_d;
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return t * t / (1.0 + f1 * f1 * t * t) + ct_d * ct_d / denom;
}

double PencilCost::at_infinity() const {
  const double denom = a * a + f2 * f2 * c * c;
  const double second = denom == 0.0 ? std::numeric_limits<double>::infinity() : c * c / denom;
  if (f1 == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (f1 * f1) + second;
}

namespace {

using Coeffs = std::vector<double>;

Coeffs multiply(const Coeffs& p, const Coeffs& q) {
  Coeffs out(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += p[i] * q[j];
  }
  return out;
}

Coeffs add(Coeffs p, const Coeffs& q, double scale = 1.0) {
  if (p.size() < q.size()) p.resize(q.size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) p[i] += scale * q[i];
  return p;
}

}  // namespace

Polynomial PencilCost::derivative_numerator() const {
  // g(t) = t ((at+b)^2 + f2^2 (ct+d)^2)^2 - (ad - bc) (1 + f1^2 t^2)^2 (at+b)(ct+d)
  const Coeffs at_b{b, a};
  const Coeffs ct_d{d, c};
  const Coeffs quad = add(multiply(at_b, at_b), multiply(ct_d, ct_d), f2 * f2);
  const Coeffs first = multiply(Coeffs{0.0, 1.0}, multiply(quad, quad));
  const Coeffs one_f1 = {1.0, 0.0, f1 * f1};
  const Coeffs second = multiply(multiply(one_f1, one_f1), multiply(at_b, ct_d));
  return Polynomial(add(first, second, -(a * d - b * c)));
}

namespace {

Mat3 translation(const HomoPoint2& x) {
  Mat3 T = Mat3::Identity();
  T(0, 2) = -x.u();
  T(1, 2) = -x.v();
  return T;
}

// Scales a homogeneous epipole so its first two entries have unit norm and
// returns the rotation taking it to (1, 0, e3).
Mat3 epipole_rotation(Vec3& e, const char* which) {
  const double planar = std::hypot(e.x(), e.y());
  if (planar <= 1e-12 * std::abs(e.z())) {
    throw Error(ErrorCode::EpipoleAtPoint,
                std::string(which) + " epipole coincides with the observed point");
  }
  e /= planar;
  Mat3 R;
  R << e.x(), e.y(), 0.0,
       -e.y(), e.x(), 0.0,
       0.0, 0.0, 1.0;
  return R;
}

HomoPoint2 closest_to_origin(const Vec3& line) {
  return HomoPoint2(-line.x() * line.z(), -line.y() * line.z(),
                    line.x() * line.x() + line.y() * line.y());
}

}  // namespace

CanonicalPair canonicalize(const Mat3& F, const HomoPoint2& x1, const HomoPoint2& x2) {
  Eigen::JacobiSVD<Mat3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (!(s[1] > 1e-12 * s[0]) || s[2] > 1e-6 * s[0]) {
    throw Error(ErrorCode::RankDeficientF, "fundamental matrix must have rank 2");
  }

  CanonicalPair c;
  c.T1 = translation(x1);
  c.T2 = translation(x2);
  // T^-1 of a pure translation is the opposite translation.
  Mat3 T1_inv = c.T1;
  T1_inv.topRightCorner<2, 1>() *= -1.0;
  Mat3 T2_inv = c.T2;
  T2_inv.topRightCorner<2, 1>() *= -1.0;
  const Mat3 Ft = T2_inv.transpose() * F * T1_inv;

  Eigen::JacobiSVD<Mat3> svd_t(Ft, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 e1 = svd_t.matrixV().col(2);
  Vec3 e2 = svd_t.matrixU().col(2);
  c.R1 = epipole_rotation(e1, "first");
  c.R2 = epipole_rotation(e2, "second");

  const Mat3 Fc = c.R2 * Ft * c.R1.transpose();
  c.pencil = PencilCost{Fc(1, 1), Fc(1, 2), Fc(2, 1), Fc(2, 2), e1.z(), e2.z()};
  return c;
}

CorrectedPair hs_correct_pair(const Mat3& F, const HomoPoint2& x1, const HomoPoint2& x2) {
  const CanonicalPair canon = canonicalize(F, x1, x2);
  const PencilCost& s = canon.pencil;

  std::vector<double> candidates;
  try {
    candidates = real_roots(s.derivative_numerator());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateAllZero) throw;
    candidates = {0.0};
  }
  // Ties go to the smallest |t|.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](double l, double r) { return std::abs(l) < std::abs(r); });

  double best_t = std::numeric_limits<double>::infinity();
  double best_cost = std::numeric_limits<double>::infinity();
  for (double t : candidates) {
    const double cost = s(t);
    if (cost < best_cost) {
      best_t = t;
      best_cost = cost;
    }
  }
  if (const double asymptote = s.at_infinity(); asymptote < best_cost) {
    best_t = std::numeric_limits<double>::infinity();
    best_cost = asymptote;
  }

  Vec3 l1;
  Vec3 l2;
  if (std::isinf(best_t)) {
    l1 = Vec3(s.f1, 0.0, -1.0);
    l2 = Vec3(-s.f2 * s.c, s.a, s.c);
  } else {
    const double t = best_t;
    l1 = Vec3(t * s.f1, 1.0, -t);
    l2 = Vec3(-s.f2 * (s.c * t + s.d), s.a * t + s.b, s.c * t + s.d);
  }

  Mat3 T1_inv = canon.T1;
  T1_inv.topRightCorner<2, 1>() *= -1.0;
  Mat3 T2_inv = canon.T2;
  T2_inv.topRightCorner<2, 1>() *= -1.0;

  CorrectedPair out;
  out.x1 = HomoPoint2(Vec3(T1_inv * canon.R1.transpose() * closest_to_origin(l1).coords)).normalized();
  out.x2 = HomoPoint2(Vec3(T2_inv * canon.R2.transpose() * closest_to_origin(l2).coords)).normalized();
  out.t_star = best_t;
  out.cost = best_cost;
  return out;
}

TriangulationResult triangulate_two_view_optimal(const ProjectionMatrix& P1,
                                                 const ProjectionMatrix& P2, const HomoPoint2& x1,
                                                 const HomoPoint2& x2) {
  const Mat3 F = fundamental_from_projections(P1, P2);
  const CorrectedPair corrected = hs_correct_pair(F, x1, x2);

  const std::array<ProjectionMatrix, 2> views{P1, P2};
  const Track corrected_track{0, {{0, corrected.x1}, {1, corrected.x2}}};
  TriangulationResult result = triangulate_linear(views, corrected_track);
  result.method = TriangulationMethod::TwoViewOptimal;
  if (!result.ok()) return result;

  const Track original{0, {{0, x1.normalized()}, {1, x2.normalized()}}};
  fill_residuals(views, original, result);
  return result;
}

Vec3 ray_midpoint(std::span<const ProjectionMatrix> views, const Track& track) {
  validate_track(views, track);
  Vec3 origin[2];
  Vec3 dir[2];
  for (int k = 0; k < 2; ++k) {
    const auto& obs = track.observations[k];
    const Mat34& P = views[obs.view_index].P;
    const Eigen::PartialPivLU<Mat3> lu(P.leftCols<3>());
    origin[k] = -lu.solve(Vec3(P.col(3)));
    dir[k] = lu.solve(obs.pixel.normalized().coords).normalized();
  }
  const Vec3 w0 = origin[0] - origin[1];
  const double b = dir[0].dot(dir[1]);
  const double denom = 1.0 - b * b;
  if (denom < 1e-14) {
    throw Error(ErrorCode::InitializationFailed, "back-projected rays are parallel");
  }
  const double d0 = dir[0].dot(w0);
  const double d1 = dir[1].dot(w0);
  const double s = (b * d1 - d0) / denom;
  const double t = (d1 - b * d0) / denom;
  return 0.5 * ((origin[0] + s * dir[0]) + (origin[1] + t * dir[1]));
}

TriangulationResult triangulate_nview_lm(std::span<const ProjectionMatrix> views, const Track& track,
                                         const LMSettings& settings) {
  const TriangulationResult initial = triangulate_linear(views, track);
  Vec3 x0;
  if (initial.ok()) {
    x0 = initial.point.euclidean();
  } else {
    try {
      x0 = ray_midpoint(views, track);
    } catch (const Error& e) {
      throw Error(ErrorCode::InitializationFailed,
                  "linear stage returned a point at infinity and " + e.message());
    }
  }

  // LM runs over an offset from x0. Each observation's camera is moved so x0
  // is the world origin and the observed pixel the image origin; residuals
  // are then small numbers computed without cancellation, which keeps the
  // forward-difference Jacobian accurate.
  struct LocalView {
    Eigen::Matrix<double, 3, 4> rows;  // u-numerator, v-numerator, depth
  };
  std::vector<LocalView> local;
  local.reserve(track.observations.size());
  const Vec4 X0 = x0.homogeneous();
  for (const auto& obs : track.observations) {
    const Mat34& P = views[obs.view_index].P;
    Mat34 A;
    A.leftCols<3>() = P.leftCols<3>();
    A.col(3) = P * X0;
    LocalView lv;
    lv.rows.row(0) = A.row(0) - obs.pixel.u() * A.row(2);
    lv.rows.row(1) = A.row(1) - obs.pixel.v() * A.row(2);
    lv.rows.row(2) = A.row(2);
    local.push_back(lv);
  }

  LMProblem problem;
  problem.num_parameters = 3;
  problem.num_residuals = 2 * static_cast<Eigen::Index>(track.observations.size());
  problem.residual = [&](const Eigen::VectorXd& delta) -> Eigen::VectorXd {
    const Vec4 D(delta[0], delta[1], delta[2], 1.0);
    Eigen::VectorXd r(problem.num_residuals);
    for (std::size_t i = 0; i < local.size(); ++i) {
      const Vec3 h = local[i].rows * D;
      if (!(std::abs(h[2]) >= kPrincipalPlaneTolerance * local[i].rows.row(2).norm() * D.norm())) {
        return Eigen::VectorXd::Constant(problem.num_residuals,
                                         std::numeric_limits<double>::quiet_NaN());
      }
      r[2 * i] = h[0] / h[2];
      r[2 * i + 1] = h[1] / h[2];
    }
    return r;
  };

  const LMOutcome outcome = lm_minimize(problem, Eigen::VectorXd::Zero(3), settings);

  TriangulationResult result;
  result.method = TriangulationMethod::NViewLM;
  result.point = HomoPoint3::from_euclidean(x0 + Vec3(outcome.solution));
  result.converged = outcome.termination != LMTermination::MaxIterations;
  result.iterations = outcome.iterations;
  fill_residuals(views, track, result);
  // Rounding can leave the refined point a hair above its start when the
  // start is already optimal; never report worse than the initializer.
  if (initial.ok() && initial.geometric_error < result.geometric_error) {
    result.point = initial.point;
    result.per_view_residual = initial.per_view_residual;
    result.geometric_error = initial.geometric_error;
  }
  return result;
}

std::int64_t degree_conjecture(int n) {
  if (n < 2 || n > 100000) {
    throw Error(ErrorCode::DomainError, "degree_conjecture needs 2 <= n <= 100000");
  }
  const std::int64_t m = n;
  return (9 * m * m * m - 21 * m * m + 16 * m - 8) / 2;
}

}  // namespace mvtri
