#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tractconn/error.hpp"
#include "tractconn/matrix.hpp"

namespace tractconn::stats {

/// Pearson correlation of two equal-length vectors.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), Errc::LengthMismatch, "pearson: lengths differ");
  require(x.size() >= 2, Errc::EmptyInput, "pearson needs at least two values");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) fail(Errc::ZeroVariance, "pearson: a vector has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

template <class T>
std::vector<double> upper_triangle(const Matrix<T>& m, bool include_diagonal) {
  std::vector<double> v;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = include_diagonal ? i : i + 1; j < m.cols(); ++j) v.push_back(static_cast<double>(m(i, j)));
  return v;
}

/// Pearson correlation between the upper-triangular entries (strict by default).
template <class T>
double pearson_upper(const Matrix<T>& a, const Matrix<T>& b, bool include_diagonal = false) {
  require(a.is_square() && b.is_square() && a.rows() == b.rows(), Errc::ShapeMismatch,
          "pearson_upper needs square matrices of equal size");
  return pearson(upper_triangle(a, include_diagonal), upper_triangle(b, include_diagonal));
}

/// Common diagonal shift c = epsilon + max(0, -lambda_min(A), -lambda_min(B))
/// that makes count matrices positive definite before taking logarithms.
/// epsilon = 0 compares SPD inputs unshifted.
struct ShiftPolicy {
  double epsilon = 1.0;

  static constexpr ShiftPolicy none() { return {0.0}; }
};

/// Eigendecomposition of a symmetric matrix, reusable across comparisons:
/// log(A + cI) = V diag(log(lambda + c)) V^T for any shift c.
struct SymmetricSpectrum {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;

  template <class T>
  static SymmetricSpectrum of(const Matrix<T>& m) {
    require(m.is_square(), Errc::NotSquare, "spectrum of a non-square matrix");
    require(m.is_symmetric(), Errc::NotSymmetric, "LERM needs symmetric matrices");
    const auto n = static_cast<Eigen::Index>(m.rows());
    Eigen::MatrixXd dense(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) dense(i, j) = static_cast<double>(m(i, j));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) fail(Errc::EigenFailure, "symmetric eigendecomposition did not converge");
    return {solver.eigenvectors(), solver.eigenvalues()};
  }

  double min_eigenvalue() const { return values.size() ? values.minCoeff() : 0.0; }

  Eigen::MatrixXd log_shifted(double shift) const {
    Eigen::VectorXd logs(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      const double lambda = values[i] + shift;
      if (!(lambda > 0.0)) fail(Errc::NotPositiveDefinite, "shifted matrix is not positive definite");
      logs[i] = std::log(lambda);
    }
    return vectors * logs.asDiagonal() * vectors.transpose();
  }
};

struct LermResult {
  double distance = 0.0;
  double shift = 0.0;
};

inline double lerm_shift(const SymmetricSpectrum& a, const SymmetricSpectrum& b, const ShiftPolicy& policy) {
  return policy.epsilon + std::max({0.0, -a.min_eigenvalue(), -b.min_eigenvalue()});
}

inline LermResult lerm(const SymmetricSpectrum& a, const SymmetricSpectrum& b, const ShiftPolicy& policy = {}) {
  require(a.values.size() == b.values.size(), Errc::ShapeMismatch, "LERM needs matrices of equal size");
  const double shift = lerm_shift(a, b, policy);
  const Eigen::MatrixXd diff = a.log_shifted(shift) - b.log_shifted(shift);
  return {diff.norm(), shift};
}

/// Log-Euclidean distance ||log(A + cI) - log(B + cI)||_F.
template <class T>
LermResult lerm(const Matrix<T>& a, const Matrix<T>& b, const ShiftPolicy& policy = {}) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), Errc::ShapeMismatch, "LERM needs matrices of equal size");
  return lerm(SymmetricSpectrum::of(a), SymmetricSpectrum::of(b), policy);
}

struct SimilarityReport {
  double pearson_r = 0.0;
  double lerm = 0.0;
  double spd_shift_used = 0.0;
};

template <class T>
SimilarityReport similarity(const Matrix<T>& a, const Matrix<T>& b, const ShiftPolicy& policy = {}) {
  const auto d = lerm(a, b, policy);
  return {pearson_upper(a, b), d.distance, d.shift};
}

}  // namespace tractconn::stats
