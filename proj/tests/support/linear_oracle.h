#pragma once

#include <span>
#include <vector>

#include "revtime/core/matrix.h"

namespace oracle {

// [intercept, coef...] of least squares with an unpenalized intercept and
// ridge penalty lambda on the coefficients, solved densely by Eigen.
std::vector<double> least_squares(const revtime::Matrix& x, std::span<const double> y,
                                  double lambda);

}  // namespace oracle
