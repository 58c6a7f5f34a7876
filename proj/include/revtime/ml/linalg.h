#pragma once

#include <optional>
#include <span>
#include <vector>

#include "revtime/core/matrix.h"

namespace revtime::ml {

// Solves A x = b for symmetric positive-definite A by Cholesky. Returns
// nullopt when a pivot falls to or below relative_pivot_tol * max(diag(A)).
std::optional<std::vector<double>> cholesky_solve(const Matrix& a, std::span<const double> b,
                                                  double relative_pivot_tol = 1e-12);

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
};

// Cyclic Jacobi rotations; intended for the small (p <= ~100) Gram matrices
// of the linear models.
SymmetricEigen symmetric_eigen(const Matrix& a);

// X^T X and X^T y for column-centered inputs.
Matrix gram(const Matrix& x);
std::vector<double> cross(const Matrix& x, std::span<const double> y);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace revtime::ml
