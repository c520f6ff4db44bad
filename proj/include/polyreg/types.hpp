#pragma once

#include <Eigen/Core>

namespace polyreg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace polyreg
