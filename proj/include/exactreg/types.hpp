#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>
#include <vector>

namespace exactreg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;
using IndexSet = std::vector<int>;

// Absolute tolerance for active-set detection and cone membership.
inline constexpr double kGeomTol = 1e-9;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace exactreg
