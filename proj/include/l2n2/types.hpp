#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "l2n2/errors.hpp"

namespace l2n2 {

using Index = Eigen::Index;

/// Row-major n x D coordinate matrix; one sample point per row.
template <typename Scalar>
using PointCloudT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PointCloud = PointCloudT<double>;

/// Neighbor orders (k, j) of the ratio statistic, k > j >= 1.
struct KJPair {
  int k = 2;
  int j = 1;

  friend bool operator==(const KJPair&, const KJPair&) = default;
};

inline void validate(const KJPair& pair) {
  if (pair.j < 1 || pair.k <= pair.j)
    throw Error(ErrorCode::InvalidArgument,
                "neighbor pair requires k > j >= 1, got (" + std::to_string(pair.k) + "," +
                    std::to_string(pair.j) + ")");
}

/// Throws unless the cloud has n >= 2 rows, D >= 1 columns and finite entries.
template <typename Derived>
void validate_cloud(const Eigen::MatrixBase<Derived>& cloud) {
  if (cloud.rows() < 2 || cloud.cols() < 1)
    throw Error(ErrorCode::InvalidArgument, "point cloud needs n >= 2 and D >= 1, got " +
                                                std::to_string(cloud.rows()) + "x" +
                                                std::to_string(cloud.cols()));
  for (Index i = 0; i < cloud.rows(); ++i)
    for (Index c = 0; c < cloud.cols(); ++c)
      if (!std::isfinite(static_cast<double>(cloud(i, c))))
        throw Error(ErrorCode::InvalidData,
                    "non-finite coordinate at row " + std::to_string(i) + ", column " +
                        std::to_string(c));
}

/// Euler-Mascheroni constant.
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

}  // namespace l2n2
