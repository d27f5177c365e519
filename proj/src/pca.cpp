#include "dreb/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dreb/types.hpp"

namespace dreb {

EigenResult jacobi_eigen(const Matrix& symmetric, std::size_t max_sweeps) {
  const std::size_t n = symmetric.size();
  for (const auto& row : symmetric) {
    if (row.size() != n) {
      throw ValidationError("jacobi_eigen expects a square matrix");
    }
  }

  Matrix a = symmetric;
  Matrix v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  auto off_diagonal = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) s += a[i][j] * a[i][j];
    }
    return s;
  };

  for (std::size_t sweep = 0; sweep < max_sweeps && off_diagonal() > 1e-24; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i][p];
          const double aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a[p][i];
          const double aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v[i][p];
          const double viq = v[i][q];
          v[i][p] = c * vip - s * viq;
          v[i][q] = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });

  EigenResult out;
  out.values.resize(n);
  out.vectors.assign(n, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    out.values[r] = a[order[r]][order[r]];
    for (std::size_t i = 0; i < n; ++i) out.vectors[r][i] = v[i][order[r]];
  }
  return out;
}

std::vector<double> Pca::project(const std::vector<double>& point) const {
  std::vector<double> out(components.size(), 0.0);
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (std::size_t k = 0; k < mean.size(); ++k) {
      out[c] += components[c][k] * (point[k] - mean[k]);
    }
  }
  return out;
}

Matrix Pca::project_all(const Matrix& points) const {
  Matrix out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(project(p));
  return out;
}

Pca pca_fit(const Matrix& points, std::size_t n_components) {
  if (points.size() < 2) {
    throw ValidationError("pca needs at least two points");
  }
  const std::size_t n = points.size();
  const std::size_t d = points.front().size();
  for (const auto& p : points) {
    if (p.size() != d) {
      throw ValidationError("pca points have inconsistent dimension");
    }
  }
  n_components = std::min(n_components, d);

  Pca pca;
  pca.mean.assign(d, 0.0);
  for (const auto& p : points) {
    for (std::size_t k = 0; k < d; ++k) pca.mean[k] += p[k];
  }
  for (double& m : pca.mean) m /= static_cast<double>(n);

  Matrix cov(d, std::vector<double>(d, 0.0));
  for (const auto& p : points) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = p[i] - pca.mean[i];
      for (std::size_t j = i; j < d; ++j) {
        cov[i][j] += di * (p[j] - pca.mean[j]);
      }
    }
  }
  const double norm = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov[i][j] *= norm;
      cov[j][i] = cov[i][j];
    }
  }

  EigenResult eig = jacobi_eigen(cov);
  pca.components.assign(eig.vectors.begin(),
                        eig.vectors.begin() + static_cast<std::ptrdiff_t>(n_components));
  pca.eigenvalues.assign(eig.values.begin(),
                         eig.values.begin() + static_cast<std::ptrdiff_t>(n_components));
  return pca;
}

}  // namespace dreb
