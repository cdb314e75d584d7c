#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace hypbc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A pivot below this fraction of the largest row norm marks the system singular.
inline constexpr double kPivotThreshold = 1e-13;

/// Solves a square system by LU with partial pivoting. Throws RankDeficiencyError
/// naming the original rows whose pivots fall below kPivotThreshold.
Vec solve_checked(const Mat& a, const Vec& rhs, std::string_view context);

/// Orthogonal projector onto the row space of `rows` (rows assumed independent).
Mat row_space_projector(const Mat& rows);

}  // namespace hypbc
