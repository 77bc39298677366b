#pragma once

// Shared test utilities: deterministic random symplectic/Lagrangian data and
// small closed-form fixtures.

#include "symidx/core.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <random>

namespace testutil {

using namespace symidx;

inline Mat random_symmetric(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat S(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) S(i, j) = S(j, i) = g(rng);
  return S;
}

inline Mat random_matrix(std::mt19937_64& rng, Index r, Index c, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat M(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) M(i, j) = g(rng);
  return M;
}

inline Mat random_spd(std::mt19937_64& rng, Index n, double scale = 1.0) {
  Mat A = random_matrix(rng, n, n, scale);
  return A * A.transpose() + 0.3 * Mat::Identity(n, n);
}

/// Random symplectic matrix exp(J S), S symmetric — exactly symplectic up to
/// the accuracy of the matrix exponential.
inline Mat random_symplectic(std::mt19937_64& rng, Index two_n, double scale = 0.7) {
  SymplecticSpace sp = SymplecticSpace::standard(two_n);
  Mat S = random_symmetric(rng, two_n, scale);
  Mat G = sp.form * S;
  return G.exp();
}

/// Random Lagrangian frame: image of the vertical under a random symplectic.
inline Frame random_lagrangian(std::mt19937_64& rng, const SymplecticSpace& sp,
                               double scale = 0.7) {
  Mat T = random_symplectic(rng, sp.dim(), scale);
  return make_frame(sp, Mat(T * vertical_frame(sp).cols));
}

/// Random Lagrangian containing a given isotropic subspace V: lift a random
/// Lagrangian of the quotient V^sigma / V through a Darboux realization.
inline Frame random_lagrangian_containing(std::mt19937_64& rng, const SymplecticSpace& sp,
                                          const Frame& V) {
  Frame vperp = skew_complement(V);
  Mat proj = vperp.cols;
  if (V.dim() > 0) proj -= V.cols * (V.cols.transpose() * vperp.cols);
  Mat U = orthonormal_span<double>(proj);
  if (U.cols() == 0) return make_frame(sp, V.cols);  // V is already Lagrangian
  Mat G = U.transpose() * sp.form.transpose() * U;
  Mat E = U * darboux_basis_from_gram(G);
  Frame lr = random_lagrangian(rng, SymplecticSpace::standard(U.cols()));
  Mat span(sp.dim(), V.dim() + lr.dim());
  span << V.cols, E * lr.cols;
  return make_frame(sp, span);
}

/// 2D rotation R(t) = exp(tJ) in (p, x) coordinates.
inline Mat rotation2(double t) {
  Mat R(2, 2);
  R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return R;
}

/// Frame of the 1-dimensional span of (a, b) in the standard 2D space.
inline Frame line2(const SymplecticSpace& sp, double a, double b) {
  Mat c(2, 1);
  c << a, b;
  return make_frame(sp, c);
}

}  // namespace testutil
