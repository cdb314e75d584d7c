#include "hypbc/linalg.hpp"

#include "hypbc/errors.hpp"

#include <string>
#include <vector>

namespace hypbc {

Vec solve_checked(const Mat& a, const Vec& rhs, std::string_view context) {
  if (a.rows() != a.cols() || a.rows() != rhs.size()) {
    throw RankDeficiencyError(std::string(context) + ": system is not square (" +
                                  std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ")",
                              {});
  }
  const Eigen::Index n = a.rows();
  if (n == 0) return Vec(0);
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, a.row(i).lpNorm<Eigen::Infinity>());

  Eigen::PartialPivLU<Mat> lu(a);
  const Mat& packed = lu.matrixLU();
  // (P A).row(k) == A.row(original[k])
  const auto& perm = lu.permutationP().indices();
  std::vector<int> original(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) original[static_cast<std::size_t>(perm(i))] = static_cast<int>(i);

  std::vector<int> bad;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(std::abs(packed(k, k)) >= kPivotThreshold * scale) || scale == 0.0) {
      bad.push_back(original[static_cast<std::size_t>(k)]);
    }
  }
  if (!bad.empty()) {
    std::string rows;
    for (int r : bad) rows += (rows.empty() ? "" : ",") + std::to_string(r);
    throw RankDeficiencyError(std::string(context) + ": singular system, rows " + rows, bad);
  }
  return lu.solve(rhs);
}

Mat row_space_projector(const Mat& rows) {
  const Mat gram = rows * rows.transpose();
  return rows.transpose() * gram.ldlt().solve(rows);
}

}  // namespace hypbc
