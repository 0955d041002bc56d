#pragma once

// Pinhole camera model in homogeneous coordinates: intrinsics, pose,
// projection and the epipolar relation between two projection matrices.

#include <cmath>

#include <Eigen/Core>

namespace mvtri {

using Mat3 = Eigen::Matrix<double, 3, 3, Eigen::RowMajor>;
using Mat34 = Eigen::Matrix<double, 3, 4, Eigen::RowMajor>;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

/// Homogeneous scene point (x1, x2, x3, w).
struct HomoPoint3 {
  Vec4 coords = Vec4(0.0, 0.0, 0.0, 1.0);

  HomoPoint3() = default;
  explicit HomoPoint3(const Vec4& c) : coords(c) {}
  HomoPoint3(double x1, double x2, double x3, double w = 1.0) : coords(x1, x2, x3, w) {}

  static HomoPoint3 from_euclidean(const Vec3& p) { return HomoPoint3(p.x(), p.y(), p.z(), 1.0); }

  double w() const { return coords[3]; }
  bool is_finite(double tol = 1e-12) const { return std::abs(coords[3]) > tol * coords.norm(); }
  Vec3 euclidean() const { return coords.head<3>() / coords[3]; }
  HomoPoint3 normalized() const { return HomoPoint3(Vec4(coords / coords[3])); }

  bool operator==(const HomoPoint3& o) const { return coords == o.coords; }
};

/// Homogeneous image point (u, v, w); pixel units when w = 1.
struct HomoPoint2 {
  Vec3 coords = Vec3(0.0, 0.0, 1.0);

  HomoPoint2() = default;
  explicit HomoPoint2(const Vec3& c) : coords(c) {}
  HomoPoint2(double u, double v, double w = 1.0) : coords(u, v, w) {}

  static HomoPoint2 from_euclidean(const Vec2& p) { return HomoPoint2(p.x(), p.y(), 1.0); }

  double u() const { return coords[0] / coords[2]; }
  double v() const { return coords[1] / coords[2]; }
  double w() const { return coords[2]; }
  Vec2 euclidean() const { return coords.head<2>() / coords[2]; }
  HomoPoint2 normalized() const { return HomoPoint2(Vec3(coords / coords[2])); }

  bool operator==(const HomoPoint2& o) const { return coords == o.coords; }
};

/// Calibration matrix parameters. The principal point is stored in pixels, so
/// K = [[sx*f, a, ox], [0, sy*f, oy], [0, 0, 1]].
struct CameraIntrinsics {
  double f = 1.0;   // focal length, scene units
  double sx = 1.0;  // pixels per scene unit along u
  double sy = 1.0;  // pixels per scene unit along v
  double ox = 0.0;  // principal point, pixels
  double oy = 0.0;
  double a = 0.0;   // skew, pixels

  /// Square pixels with a focal length already expressed in pixels.
  static CameraIntrinsics from_focal_pixels(double focal_px, double ox, double oy);

  Mat3 matrix() const;
  bool is_valid() const;
};

struct CameraView {
  CameraIntrinsics intrinsics;
  Mat3 rotation = Mat3::Identity();
  Vec3 center = Vec3::Zero();
  int image_width = 1;
  int image_height = 1;

  /// Camera at `center` whose optical axis passes through `target`. The image
  /// v axis points along -up.
  static CameraView look_at(const CameraIntrinsics& k, const Vec3& center, const Vec3& target,
                            const Vec3& up, int width, int height);

  bool contains(const Vec2& pixel) const {
    return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() < image_width &&
           pixel.y() < image_height;
  }
};

/// 3x4 camera matrix. Any nonzero scaling describes the same camera.
struct ProjectionMatrix {
  Mat34 P = Mat34::Zero();

  ProjectionMatrix() = default;
  explicit ProjectionMatrix(const Mat34& m) : P(m) {}

  Mat3 left_block() const { return P.leftCols<3>(); }
  bool operator==(const ProjectionMatrix& o) const { return P == o.P; }
};

/// Result of imaging a point. `in_front` is the cheirality flag: the point has
/// positive depth in the camera frame.
struct ImagePoint {
  HomoPoint2 point;
  double depth = 0.0;
  bool in_front = false;
};

/// Frobenius tolerance on R^T R - I.
inline constexpr double kRotationTolerance = 1e-10;
/// Projected w below this magnitude means the point lies on the principal plane.
inline constexpr double kPrincipalPlaneTolerance = 1e-14;

bool is_rotation(const Mat3& r, double tol = kRotationTolerance);

ProjectionMatrix compose_projection(const CameraView& view);

ImagePoint project(const CameraView& view, const HomoPoint3& point);
ImagePoint project(const ProjectionMatrix& P, const HomoPoint3& point);

/// Pixel coordinates of P*X; throws DegeneratePoint on the principal plane.
Vec2 project_pixel(const ProjectionMatrix& P, const Vec3& point);

/// Right null vector of P, scaled to w = 1 when the center is finite.
HomoPoint3 camera_center(const ProjectionMatrix& P);

/// F with x2^T F x1 = 0, unit Frobenius norm.
Mat3 fundamental_from_projections(const ProjectionMatrix& P1, const ProjectionMatrix& P2);

Mat3 cross_matrix(const Vec3& v);

}  // namespace mvtri
