#include "mvtri/geometry.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "mvtri/error.hpp"

namespace mvtri {

CameraIntrinsics CameraIntrinsics::from_focal_pixels(double focal_px, double ox, double oy) {
  CameraIntrinsics k;
  k.f = focal_px;
  k.sx = 1.0;
  k.sy = 1.0;
  k.ox = ox;
  k.oy = oy;
  k.a = 0.0;
  return k;
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << sx * f, a, ox,
       0.0, sy * f, oy,
       0.0, 0.0, 1.0;
  return k;
}

bool CameraIntrinsics::is_valid() const {
  return f > 0.0 && sx > 0.0 && sy > 0.0 && std::isfinite(f * sx * sy) && std::isfinite(ox) &&
         std::isfinite(oy) && std::isfinite(a);
}

CameraView CameraView::look_at(const CameraIntrinsics& k, const Vec3& center, const Vec3& target,
                               const Vec3& up, int width, int height) {
  const Vec3 forward = (target - center).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-12) {
    throw Error(ErrorCode::InvalidSpec, "look_at: up vector parallel to viewing direction");
  }
  right.normalize();
  const Vec3 down = forward.cross(right);

  CameraView view;
  view.intrinsics = k;
  view.rotation.row(0) = right.transpose();
  view.rotation.row(1) = down.transpose();
  view.rotation.row(2) = forward.transpose();
  view.center = center;
  view.image_width = width;
  view.image_height = height;
  return view;
}

bool is_rotation(const Mat3& r, double tol) {
  return (r.transpose() * r - Mat3::Identity()).norm() < tol && r.determinant() > 0.0;
}

ProjectionMatrix compose_projection(const CameraView& view) {
  if (!is_rotation(view.rotation)) {
    throw Error(ErrorCode::InvalidRotation, "rotation is not orthonormal with determinant +1");
  }
  if (!view.intrinsics.is_valid()) {
    throw Error(ErrorCode::InvalidIntrinsics, "f, sx and sy must be strictly positive");
  }
  Mat34 extrinsic;
  extrinsic.leftCols<3>() = Mat3::Identity();
  extrinsic.col(3) = -view.center;
  return ProjectionMatrix(view.intrinsics.matrix() * view.rotation * extrinsic);
}

ImagePoint project(const ProjectionMatrix& P, const HomoPoint3& point) {
  const Vec3 x = P.P * point.coords;
  const double scale = P.P.norm() * point.coords.norm();
  if (!(std::abs(x[2]) >= kPrincipalPlaneTolerance * scale)) {
    throw Error(ErrorCode::DegeneratePoint, "point projects onto the line at infinity");
  }
  // Depth of a point for a general finite camera.
  const Mat3 m = P.left_block();
  const double det = m.determinant();
  const double depth =
      (det >= 0.0 ? 1.0 : -1.0) * x[2] / (point.coords[3] * m.row(2).norm());

  ImagePoint out;
  out.point = HomoPoint2(x);
  out.depth = depth;
  out.in_front = depth > 0.0;
  return out;
}

ImagePoint project(const CameraView& view, const HomoPoint3& point) {
  return project(compose_projection(view), point);
}

Vec2 project_pixel(const ProjectionMatrix& P, const Vec3& point) {
  const Vec3 x = P.P.leftCols<3>() * point + P.P.col(3);
  if (!(std::abs(x[2]) >= kPrincipalPlaneTolerance * P.P.norm() * (1.0 + point.norm()))) {
    throw Error(ErrorCode::DegeneratePoint, "point projects onto the line at infinity");
  }
  return x.head<2>() / x[2];
}

HomoPoint3 camera_center(const ProjectionMatrix& P) {
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(P.P, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s[2] > 1e-8 * s[0])) {
    throw Error(ErrorCode::RankDeficient, "projection matrix has rank below 3");
  }
  Vec4 c = svd.matrixV().col(3);
  if (std::abs(c[3]) > 1e-12) {
    c /= c[3];
  } else {
    c[3] = 0.0;
  }
  return HomoPoint3(c);
}

Mat3 cross_matrix(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat3 fundamental_from_projections(const ProjectionMatrix& P1, const ProjectionMatrix& P2) {
  const HomoPoint3 c1 = camera_center(P1);
  const HomoPoint3 c2 = camera_center(P2);
  if (c1.is_finite() && c2.is_finite()) {
    if ((c1.euclidean() - c2.euclidean()).norm() <= 1e-12) {
      throw Error(ErrorCode::CoincidentCenters, "camera centers coincide");
    }
  }
  const Vec3 e2 = P2.P * c1.coords;
  if (e2.norm() <= 1e-12 * P2.P.norm() * c1.coords.norm()) {
    throw Error(ErrorCode::CoincidentCenters, "first center projects to zero in second view");
  }
  // Right pseudo-inverse of a full-row-rank 3x4 matrix.
  const Eigen::Matrix<double, 4, 3> pinv =
      P1.P.transpose() * (P1.P * P1.P.transpose()).inverse();
  Mat3 F = cross_matrix(e2) * P2.P * pinv;
  F /= F.norm();
  return F;
}

}  // namespace mvtri
