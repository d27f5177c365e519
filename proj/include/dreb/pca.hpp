#pragma once

#include <cstddef>
#include <vector>

namespace dreb {

using Matrix = std::vector<std::vector<double>>;

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Pairs are returned sorted by descending eigenvalue; eigenvectors are the
// rows of `vectors` and come out orthonormal.
struct EigenResult {
  std::vector<double> values;
  Matrix vectors;
};

EigenResult jacobi_eigen(const Matrix& symmetric, std::size_t max_sweeps = 100);

struct Pca {
  std::vector<double> mean;
  Matrix components;  // n_components x dim, orthonormal rows
  std::vector<double> eigenvalues;

  std::vector<double> project(const std::vector<double>& point) const;
  Matrix project_all(const Matrix& points) const;
};

// Fits on the rows of `points` (covariance normalized by n-1). Requires at
// least two rows.
Pca pca_fit(const Matrix& points, std::size_t n_components = 2);

}  // namespace dreb
