#pragma once

#include <Eigen/Dense>

namespace geoquant {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

} // namespace geoquant
