#pragma once

// Direct linear transform calibration: recovers a 3x4 projection matrix from
// 3D-2D correspondences by minimizing the algebraic error |A p| with |p| = 1.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mvtri/geometry.hpp"

namespace mvtri {

struct CalibrationCorrespondence {
  HomoPoint3 world;  // w = 1, scene units
  HomoPoint2 pixel;  // w = 1, pixels
};

struct CalibrationResult {
  ProjectionMatrix P;
  double algebraic_residual = 0.0;
  double rms_reprojection = 0.0;
};

/// 2N x 12 system in the unknowns p = (P11, P12, ..., P34). Correspondence i
/// contributes rows (X^T, 0, -u X^T) and (0, X^T, -v X^T).
Eigen::MatrixXd build_dlt_system(std::span<const CalibrationCorrespondence> corrs);

/// Needs at least 6 correspondences whose world points are not coplanar.
CalibrationResult calibrate_dlt(std::span<const CalibrationCorrespondence> corrs);

/// Root mean square pixel distance between observed and reprojected points.
double rms_reprojection(const ProjectionMatrix& P, std::span<const CalibrationCorrespondence> corrs);

/// Reads the whitespace separated `X Y Z u v` format; '#' starts a comment.
std::vector<CalibrationCorrespondence> read_correspondences(std::istream& in);
std::vector<CalibrationCorrespondence> read_correspondences_file(const std::string& path);

}  // namespace mvtri
