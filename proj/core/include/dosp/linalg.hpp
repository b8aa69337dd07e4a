#pragma once

#include <Eigen/Core>

namespace dosp {

using Vec = Eigen::VectorXd;

}  // namespace dosp
