#pragma once

// Point triangulation from calibrated views: linear (DLT), optimal two-view
// (epipolar correction through a degree-6 polynomial) and n-view geometric
// error minimization with Levenberg-Marquardt.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mvtri/geometry.hpp"
#include "mvtri/numeric.hpp"

namespace mvtri {

struct Observation {
  int view_index = 0;
  HomoPoint2 pixel;  // w = 1

  bool operator==(const Observation&) const = default;
};

/// Observations of one scene point; view indices strictly increasing.
struct Track {
  std::int64_t point_id = 0;
  std::vector<Observation> observations;

  bool operator==(const Track&) const = default;
};

enum class TriangulationMethod { Linear, TwoViewOptimal, NViewLM };

std::string_view to_string(TriangulationMethod method);
/// Accepts the CLI spellings linear, two-opt and nview-lm.
TriangulationMethod parse_method(std::string_view name);

enum class TriangulationFailure { None, PointAtInfinity };

struct TriangulationResult {
  HomoPoint3 point;  // w = 1 on success
  TriangulationMethod method = TriangulationMethod::Linear;
  std::vector<double> per_view_residual;  // pixels, one per observation
  double geometric_error = 0.0;           // sum of squared residuals
  bool converged = false;
  TriangulationFailure failure = TriangulationFailure::None;
  int iterations = 0;

  bool ok() const { return failure == TriangulationFailure::None; }
};

/// Two image points moved onto a pair of corresponding epipolar lines.
struct CorrectedPair {
  HomoPoint2 x1;
  HomoPoint2 x2;
  double t_star = 0.0;  // infinity when the asymptotic line was selected
  double cost = 0.0;    // squared correction distance, pixels^2
};

/// Checks the track against the view list; throws InvalidTrack or
/// InsufficientObservations.
void validate_track(std::span<const ProjectionMatrix> views, const Track& track,
                    std::size_t min_observations = 2);

/// Sum over observations of the squared pixel distance to the reprojection.
double geometric_error(std::span<const ProjectionMatrix> views, const HomoPoint3& point,
                       const Track& track);

TriangulationResult triangulate_linear(std::span<const ProjectionMatrix> views, const Track& track);

/// Cost of the pencil parameter t, in the canonical frame where both points
/// sit at the origin and the epipoles lie on the x axis.
struct PencilCost {
  double a, b, c, d, f1, f2;

  double operator()(double t) const;
  /// Limit of the cost as |t| grows without bound.
  double at_infinity() const;
  /// Degree-6 numerator of ds/dt (up to a positive factor).
  Polynomial derivative_numerator() const;
};

struct CanonicalPair {
  Mat3 T1, T2;  // translations taking x1, x2 to the origin
  Mat3 R1, R2;  // rotations placing the epipoles on the x axis
  PencilCost pencil;
};

/// Transforms F for the correction; exposed for oracle tests.
CanonicalPair canonicalize(const Mat3& F, const HomoPoint2& x1, const HomoPoint2& x2);

/// Optimal correction of a correspondence so it satisfies x2^T F x1 = 0 with
/// the smallest total squared displacement.
CorrectedPair hs_correct_pair(const Mat3& F, const HomoPoint2& x1, const HomoPoint2& x2);

TriangulationResult triangulate_two_view_optimal(const ProjectionMatrix& P1,
                                                 const ProjectionMatrix& P2, const HomoPoint2& x1,
                                                 const HomoPoint2& x2);

/// Refines the linear estimate by minimizing the reprojection error. Falls
/// back to the midpoint of the first two rays when the linear stage fails.
TriangulationResult triangulate_nview_lm(std::span<const ProjectionMatrix> views, const Track& track,
                                         const LMSettings& settings = {});

/// Stacked (u, v) reprojection errors, one pair per observation.
Eigen::VectorXd reprojection_residual(std::span<const ProjectionMatrix> views, const Track& track,
                                      const Vec3& point);

/// Midpoint of the closest approach of the back-projected rays of the first
/// two observations.
Vec3 ray_midpoint(std::span<const ProjectionMatrix> views, const Track& track);

/// Degree of the optimal n-view triangulation polynomial predicted by the
/// conjectured closed form 9/2 n^3 - 21/2 n^2 + 8n - 4.
std::int64_t degree_conjecture(int n);

}  // namespace mvtri
