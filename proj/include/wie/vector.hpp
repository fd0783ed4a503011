#pragma once

#include <Eigen/Core>

namespace wie {

/// A point of R^N. Positions, velocities and force values all use this.
using Vector = Eigen::VectorXd;

}  // namespace wie
