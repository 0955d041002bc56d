#include "mvtri/calibration.hpp"

#include <fstream>
#include <istream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "mvtri/error.hpp"
#include "mvtri/numeric.hpp"

namespace mvtri {

Eigen::MatrixXd build_dlt_system(std::span<const CalibrationCorrespondence> corrs) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * static_cast<Eigen::Index>(corrs.size()), 12);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const Vec4 X = corrs[i].world.coords / corrs[i].world.w();
    const double u = corrs[i].pixel.u();
    const double v = corrs[i].pixel.v();
    const auto r0 = static_cast<Eigen::Index>(2 * i);
    A.block<1, 4>(r0, 0) = X.transpose();
    A.block<1, 4>(r0, 8) = -u * X.transpose();
    A.block<1, 4>(r0 + 1, 4) = X.transpose();
    A.block<1, 4>(r0 + 1, 8) = -v * X.transpose();
  }
  return A;
}

namespace {

// Similarity taking the centroid to the origin with mean distance `target`.
template <int D>
Eigen::Matrix<double, D + 1, D + 1> normalizing_transform(
    const std::vector<Eigen::Matrix<double, D, 1>>& pts, double target) {
  Eigen::Matrix<double, D, 1> centroid = Eigen::Matrix<double, D, 1>::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  const double s = mean_dist > 0.0 ? target / mean_dist : 1.0;

  Eigen::Matrix<double, D + 1, D + 1> T = Eigen::Matrix<double, D + 1, D + 1>::Identity();
  T.template topLeftCorner<D, D>() *= s;
  T.template topRightCorner<D, 1>() = -s * centroid;
  return T;
}

}  // namespace

CalibrationResult calibrate_dlt(std::span<const CalibrationCorrespondence> corrs) {
  if (corrs.size() < 6) {
    throw Error(ErrorCode::InsufficientPoints,
                "DLT needs at least 6 correspondences, got " + std::to_string(corrs.size()));
  }

  std::vector<Vec3> world;
  std::vector<Vec2> pixels;
  world.reserve(corrs.size());
  pixels.reserve(corrs.size());
  for (const auto& c : corrs) {
    world.push_back(c.world.euclidean());
    pixels.push_back(c.pixel.euclidean());
  }

  Vec3 mean = Vec3::Zero();
  for (const auto& p : world) mean += p;
  mean /= static_cast<double>(world.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : world) cov += (p - mean) * (p - mean).transpose();
  const Vec3 variances = Eigen::SelfAdjointEigenSolver<Mat3>(cov).eigenvalues();
  if (!(variances[0] > 1e-10 * variances[2])) {
    throw Error(ErrorCode::DegenerateGeometry,
                "world points are coplanar; a non-planar calibration target is required");
  }

  const Eigen::Matrix3d T = normalizing_transform<2>(pixels, std::sqrt(2.0));
  const Eigen::Matrix4d U = normalizing_transform<3>(world, std::sqrt(3.0));

  std::vector<CalibrationCorrespondence> normalized;
  normalized.reserve(corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    normalized.push_back({HomoPoint3(Vec4(U * world[i].homogeneous())),
                          HomoPoint2(Vec3(T * pixels[i].homogeneous()))});
  }
  const Eigen::VectorXd pn = smallest_singular_vector(build_dlt_system(normalized));
  const Mat34 Pn = Eigen::Map<const Mat34>(pn.data());

  Mat34 P = T.inverse() * Pn * U;
  P /= P.norm();
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  P.cwiseAbs().maxCoeff(&r, &c);
  if (P(r, c) < 0.0) P = -P;

  CalibrationResult result;
  result.P = ProjectionMatrix(P);
  const Eigen::Map<const Eigen::Matrix<double, 12, 1>> p(P.data());
  result.algebraic_residual = (build_dlt_system(corrs) * p).norm();
  result.rms_reprojection = rms_reprojection(result.P, corrs);
  return result;
}

double rms_reprojection(const ProjectionMatrix& P, std::span<const CalibrationCorrespondence> corrs) {
  if (corrs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : corrs) {
    const Vec2 projected = project(P, c.world).point.euclidean();
    sum += (c.pixel.euclidean() - projected).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(corrs.size()));
}

std::vector<CalibrationCorrespondence> read_correspondences(std::istream& in) {
  std::vector<CalibrationCorrespondence> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double x, y, z, u, v;
    if (!(fields >> x)) {
      if (!fields.eof()) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected X Y Z u v");
      }
      continue;  // blank
    }
    std::string extra;
    if (!(fields >> y >> z >> u >> v) || (fields >> extra)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected X Y Z u v");
    }
    out.push_back({HomoPoint3(x, y, z, 1.0), HomoPoint2(u, v, 1.0)});
  }
  return out;
}

std::vector<CalibrationCorrespondence> read_correspondences_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_correspondences(in);
}

}  // namespace mvtri
