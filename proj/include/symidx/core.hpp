#pragma once

// Linear symplectic algebra: spaces, isotropic/Lagrangian frames, and the
// rank-revealing subspace operations everything else is built on.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace symidx {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;
using Eigen::Index;

template <typename Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// Errors. Messages name the failing module and the violated condition so the
// CLI can map them to exit codes without string matching.

/// Malformed input: bad JSON shape, dimension mismatch, invalid graph data.
class schema_error : public std::runtime_error {
public:
  schema_error(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what) {}
};

/// A refinement loop hit its cap without meeting its convergence certificate.
class stabilization_error : public std::runtime_error {
public:
  stabilization_error(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what) {}
};

/// A documented mathematical precondition does not hold for the given input.
class precondition_error : public std::runtime_error {
public:
  precondition_error(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what) {}
};

// ---------------------------------------------------------------------------
// Numerical policies.

struct Tolerances {
  // Rank decisions: singular values below max(rows, cols) * eps * sigma_max
  // (with an absolute floor) are treated as zero.
  double rank_scale = 1.0;
  double rank_floor = 1e-13;
  // Eigenvalue classification for index counts: |lambda| below
  // dim * eps * max|lambda|, floored at eig_floor, counts as kernel.
  double eig_floor = 1e-12;
  // Maximum allowed |Theta^T J Theta - J| for symplectic matrices.
  double symplectic_defect = 1e-10;
};

inline const Tolerances& default_tols() {
  static const Tolerances t{};
  return t;
}

inline double rank_threshold(Index rows, Index cols, double sigma_max,
                             const Tolerances& tol = default_tols()) {
  const double eps = std::numeric_limits<double>::epsilon();
  double thr = static_cast<double>(std::max(rows, cols)) * eps * sigma_max;
  return std::max(tol.rank_scale * thr, tol.rank_floor);
}

// ---------------------------------------------------------------------------
// Symplectic space. The form is stored as the real matrix J acting by
// sigma(u, v) = <J u, v> = u^T J^T v. For complexified spaces the pairing
// conjugates its first argument: sigma_C(u, v) = sigma(conj(u), v).

struct SymplecticSpace {
  Mat form;                  // real, skew, nondegenerate (J or signed variant)
  bool complex_field = false;

  Index dim() const { return form.rows(); }

  /// Standard space (R^{2n} or C^{2n}) with J = [[0, -I], [I, 0]] in (p, x)
  /// coordinates: covector block first, sigma(e_i, e_{n+i}) = 1.
  static SymplecticSpace standard(Index two_n, bool complex_field = false) {
    if (two_n <= 0 || two_n % 2 != 0)
      throw schema_error("core", "standard space dimension must be positive and even");
    const Index n = two_n / 2;
    Mat J = Mat::Zero(two_n, two_n);
    J.topRightCorner(n, n) = -Mat::Identity(n, n);
    J.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return SymplecticSpace{std::move(J), complex_field};
  }

  SymplecticSpace complexified() const { return SymplecticSpace{form, true}; }
};

/// sigma(u, v) (bilinear; no conjugation even over C).
template <typename Scalar>
Scalar sigma_bilinear(const SymplecticSpace& sp, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  return u.transpose() * sp.form.transpose().cast<Scalar>() * v;
}

/// Pairing Gram matrix G_ij = sigma(conj(a_i), b_j); over R this is the plain
/// sigma-Gram. Isotropy and Lagrangian tests use this matrix.
template <typename Scalar>
MatT<Scalar> sigma_gram(const SymplecticSpace& sp, const MatT<Scalar>& A, const MatT<Scalar>& B) {
  if (A.rows() != sp.dim() || B.rows() != sp.dim())
    throw schema_error("core", "frame/space dimension mismatch in sigma_gram");
  return A.adjoint() * sp.form.transpose().cast<Scalar>() * B;
}

/// sigma(u, v) with the field convention of the space (conjugate-first over C).
inline double sigma(const SymplecticSpace& sp, const Vec& u, const Vec& v) {
  return u.dot(sp.form.transpose() * v);
}
inline cplx sigma(const SymplecticSpace& sp, const CVec& u, const CVec& v) {
  return (u.adjoint() * sp.form.transpose().cast<cplx>() * v)(0);
}

// ---------------------------------------------------------------------------
// Frames. A frame stores an (orthonormalized) basis of a subspace as columns.
// The zero subspace is the 0-column frame.

template <typename Scalar>
struct FrameT {
  SymplecticSpace space;
  MatT<Scalar> cols;  // space.dim() x k, orthonormal columns

  Index dim() const { return cols.cols(); }
  Index ambient_dim() const { return space.dim(); }
};

using Frame = FrameT<double>;
using CFrame = FrameT<cplx>;

/// Orthonormal basis of the column span; rank-deficient input is trimmed.
template <typename Scalar>
MatT<Scalar> orthonormal_span(const MatT<Scalar>& M, const Tolerances& tol = default_tols()) {
  if (M.cols() == 0 || M.rows() == 0) return MatT<Scalar>(M.rows(), 0);
  Eigen::JacobiSVD<MatT<Scalar>> svd(M, Eigen::ComputeThinU);
  const double thr = rank_threshold(M.rows(), M.cols(), svd.singularValues()(0), tol);
  Index r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()(r) > thr) ++r;
  return svd.matrixU().leftCols(r);
}

/// Build a frame from spanning columns (orthonormalizes, trims rank).
template <typename Scalar>
FrameT<Scalar> make_frame(const SymplecticSpace& sp, const MatT<Scalar>& span_cols,
                          const Tolerances& tol = default_tols()) {
  if (span_cols.cols() > 0 && span_cols.rows() != sp.dim())
    throw schema_error("core", "frame rows do not match space dimension");
  if (!span_cols.allFinite())
    throw schema_error("core", "frame contains non-finite entries");
  MatT<Scalar> q = orthonormal_span<Scalar>(span_cols, tol);
  if (q.rows() == 0) q = MatT<Scalar>(sp.dim(), 0);
  return FrameT<Scalar>{sp, std::move(q)};
}

inline Frame make_frame(const SymplecticSpace& sp, const Mat& cols,
                        const Tolerances& tol = default_tols()) {
  return make_frame<double>(sp, cols, tol);
}

/// Kernel (null space) of M, as orthonormal columns.
template <typename Scalar>
MatT<Scalar> kernel_basis(const MatT<Scalar>& M, const Tolerances& tol = default_tols()) {
  if (M.cols() == 0) return MatT<Scalar>(0, 0);
  if (M.rows() == 0) return MatT<Scalar>::Identity(M.cols(), M.cols());
  Eigen::JacobiSVD<MatT<Scalar>> svd(M, Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  const double thr = rank_threshold(M.rows(), M.cols(), smax, tol);
  Index r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()(r) > thr) ++r;
  return svd.matrixV().rightCols(M.cols() - r);
}

template <typename Scalar>
Index matrix_rank(const MatT<Scalar>& M, const Tolerances& tol = default_tols()) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<MatT<Scalar>> svd(M);
  const double thr = rank_threshold(M.rows(), M.cols(), svd.singularValues()(0), tol);
  Index r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()(r) > thr) ++r;
  return r;
}

// ---------------------------------------------------------------------------
// Subspace operations (ambient-space level; no symplectic structure needed).

/// Kernel extraction with an externally known dimension: the k right singular
/// directions of least singular value. Used when the kernel dimension is
/// determined exactly by structure and a thresholded decision would sit at the
/// working precision (e.g. exact containments routed through an ill-conditioned
/// chain of factorizations).
template <typename Scalar>
MatT<Scalar> kernel_basis_fixed(const MatT<Scalar>& M, Index k) {
  if (k <= 0) return MatT<Scalar>(M.cols(), 0);
  if (M.rows() == 0 || k >= M.cols()) return MatT<Scalar>::Identity(M.cols(), M.cols());
  Eigen::JacobiSVD<MatT<Scalar>> svd(M, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(k);
}

/// Orthonormal span with an externally known rank: the r leading left singular
/// vectors.
template <typename Scalar>
MatT<Scalar> orthonormal_span_fixed(const MatT<Scalar>& M, Index r) {
  if (r <= 0 || M.cols() == 0 || M.rows() == 0) return MatT<Scalar>(M.rows(), 0);
  Eigen::JacobiSVD<MatT<Scalar>> svd(M, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(std::min(r, svd.matrixU().cols()));
}

/// Orthonormal basis of span(A) ∩ span(B).
template <typename Scalar>
MatT<Scalar> intersect_spans(const MatT<Scalar>& A, const MatT<Scalar>& B,
                             const Tolerances& tol = default_tols()) {
  if (A.cols() == 0 || B.cols() == 0) return MatT<Scalar>(A.rows(), 0);
  MatT<Scalar> M(A.rows(), A.cols() + B.cols());
  M << A, -B;
  MatT<Scalar> null = kernel_basis<Scalar>(M, tol);
  if (null.cols() == 0) return MatT<Scalar>(A.rows(), 0);
  MatT<Scalar> vecs = A * null.topRows(A.cols());
  return orthonormal_span<Scalar>(vecs, tol);
}

/// Orthonormal basis of span(A) ∩ span(B) ∩ span(C), decided by a single
/// kernel extraction from the stacked projector complements. Chaining two
/// pairwise intersections re-decides rank on an already-approximate inner
/// basis and can drop a nearly-degenerate common direction.
template <typename Scalar>
MatT<Scalar> intersect_spans(const MatT<Scalar>& A, const MatT<Scalar>& B,
                             const MatT<Scalar>& C,
                             const Tolerances& tol = default_tols()) {
  const Index rows = A.rows();
  if (A.cols() == 0 || B.cols() == 0 || C.cols() == 0) return MatT<Scalar>(rows, 0);
  MatT<Scalar> M(3 * rows, rows);
  const MatT<Scalar> I = MatT<Scalar>::Identity(rows, rows);
  Index off = 0;
  for (const MatT<Scalar>* S : {&A, &B, &C}) {
    const MatT<Scalar> Q = orthonormal_span<Scalar>(*S, tol);
    M.block(off, 0, rows, rows) = I - Q * Q.adjoint();
    off += rows;
  }
  return kernel_basis<Scalar>(M, tol);
}

/// Orthonormal basis of span(A) + span(B).
template <typename Scalar>
MatT<Scalar> sum_spans(const MatT<Scalar>& A, const MatT<Scalar>& B,
                       const Tolerances& tol = default_tols()) {
  MatT<Scalar> M(A.rows(), A.cols() + B.cols());
  M << A, B;
  return orthonormal_span<Scalar>(M, tol);
}

/// Euclidean orthogonal complement of span(A) inside the ambient space.
template <typename Scalar>
MatT<Scalar> orthogonal_complement(const MatT<Scalar>& A, Index ambient_rows,
                                   const Tolerances& tol = default_tols()) {
  if (A.cols() == 0) return MatT<Scalar>::Identity(ambient_rows, ambient_rows);
  return kernel_basis<Scalar>(MatT<Scalar>(A.adjoint()), tol);
}

/// True if span(A) contains span(B).
template <typename Scalar>
bool span_contains(const MatT<Scalar>& A, const MatT<Scalar>& B, double tol = 1e-9) {
  if (B.cols() == 0) return true;
  if (A.cols() == 0) return B.norm() < tol;
  MatT<Scalar> Q = orthonormal_span<Scalar>(A);
  MatT<Scalar> resid = B - Q * (Q.adjoint() * B);
  return resid.cwiseAbs().maxCoeff() < tol;
}

// ---------------------------------------------------------------------------
// Symplectic frame operations.

/// Gram matrix of the symplectic pairing on the frame's columns.
template <typename Scalar>
MatT<Scalar> isotropy_gram(const FrameT<Scalar>& F) {
  return sigma_gram<Scalar>(F.space, F.cols, F.cols);
}

template <typename Scalar>
double isotropy_defect(const FrameT<Scalar>& F) {
  if (F.dim() == 0) return 0.0;
  return isotropy_gram(F).cwiseAbs().maxCoeff();
}

template <typename Scalar>
bool is_isotropic(const FrameT<Scalar>& F, double tol = 1e-10) {
  return isotropy_defect(F) <= tol;
}

template <typename Scalar>
bool is_lagrangian(const FrameT<Scalar>& F, double tol = 1e-10) {
  return F.dim() == F.ambient_dim() / 2 && is_isotropic(F, tol);
}

template <typename Scalar>
FrameT<Scalar> intersect(const FrameT<Scalar>& A, const FrameT<Scalar>& B,
                         const Tolerances& tol = default_tols()) {
  return FrameT<Scalar>{A.space, intersect_spans<Scalar>(A.cols, B.cols, tol)};
}

template <typename Scalar>
FrameT<Scalar> intersect(const FrameT<Scalar>& A, const FrameT<Scalar>& B,
                         const FrameT<Scalar>& C,
                         const Tolerances& tol = default_tols()) {
  return FrameT<Scalar>{A.space,
                        intersect_spans<Scalar>(A.cols, B.cols, C.cols, tol)};
}

template <typename Scalar>
FrameT<Scalar> subspace_sum(const FrameT<Scalar>& A, const FrameT<Scalar>& B,
                            const Tolerances& tol = default_tols()) {
  return FrameT<Scalar>{A.space, sum_spans<Scalar>(A.cols, B.cols, tol)};
}

/// Skew-orthogonal complement W^sigma = { u : sigma(w, u) = 0 for all w in W }.
template <typename Scalar>
FrameT<Scalar> skew_complement(const FrameT<Scalar>& W, const Tolerances& tol = default_tols()) {
  if (W.dim() == 0)
    return FrameT<Scalar>{W.space, MatT<Scalar>::Identity(W.ambient_dim(), W.ambient_dim())};
  // Rows of (W^* J^T): sigma(w_i, u) = 0 for all i.
  MatT<Scalar> rows =
      W.cols.adjoint() * W.space.form.transpose().template cast<Scalar>();
  return FrameT<Scalar>{W.space, kernel_basis<Scalar>(rows, tol)};
}

/// Apply a matrix to a frame (e.g. transport a Lagrangian by a flow).
template <typename Scalar>
FrameT<Scalar> apply(const MatT<Scalar>& T, const FrameT<Scalar>& F,
                     const Tolerances& tol = default_tols()) {
  return make_frame<Scalar>(F.space, MatT<Scalar>(T * F.cols), tol);
}

/// Vertical Lagrangian Pi = covector block = span(e_1 .. e_n) of a standard
/// 2n-dimensional space.
inline Frame vertical_frame(const SymplecticSpace& sp) {
  const Index n = sp.dim() / 2;
  Mat cols = Mat::Zero(sp.dim(), n);
  cols.topRows(n) = Mat::Identity(n, n);
  return Frame{sp, std::move(cols)};
}

/// Horizontal Lagrangian = base block = span(e_{n+1} .. e_{2n}).
inline Frame horizontal_frame(const SymplecticSpace& sp) {
  const Index n = sp.dim() / 2;
  Mat cols = Mat::Zero(sp.dim(), n);
  cols.bottomRows(n) = Mat::Identity(n, n);
  return Frame{sp, std::move(cols)};
}

/// |Theta^T J Theta - J|_max, the symplecticity defect.
inline double symplectic_defect(const SymplecticSpace& sp, const Mat& Theta) {
  return (Theta.transpose() * sp.form * Theta - sp.form).cwiseAbs().maxCoeff();
}

inline void require_symplectic(const SymplecticSpace& sp, const Mat& Theta,
                               const std::string& module,
                               const Tolerances& tol = default_tols()) {
  if (Theta.rows() != sp.dim() || Theta.cols() != sp.dim())
    throw schema_error(module, "matrix size does not match space dimension");
  const double d = symplectic_defect(sp, Theta);
  if (!(d <= tol.symplectic_defect))
    throw precondition_error(module, "matrix is not symplectic (defect " + std::to_string(d) + ")");
}

// ---------------------------------------------------------------------------
// Darboux-type constructions.

/// Darboux basis of a skew form given by its Gram matrix Omega (2m x 2m,
/// nondegenerate): returns E with E^T Omega E equal to the standard J^T-Gram,
/// i.e. the columns e_1..e_m, f_1..f_m satisfy omega(e_i, f_j) = delta_ij and
/// all other pairings vanish. Column order matches the (p, x) convention:
/// sigma(E_i, E_{m+i}) = +1.
Mat darboux_basis_from_gram(const Mat& Omega, const Tolerances& tol = default_tols());

/// Symplectic transformation T with T(L2) = vertical Pi and T(L0) = horizontal
/// complement. L0, L2 must be transversal Lagrangians.
Mat darboux_transform(const Frame& L0, const Frame& L2, const Tolerances& tol = default_tols());

/// Symplectic reduction by an isotropic subspace V: the quotient V^sigma / V
/// carries an induced form; `apply` sends a Lagrangian L to the reduced
/// Lagrangian (L ∩ V^sigma + V) / V expressed in a Darboux basis of the
/// quotient, so all frames reduced by the same object land in one space.
class SymplecticReduction {
public:
  SymplecticReduction(const Frame& V, const Tolerances& tol = default_tols());

  const SymplecticSpace& reduced_space() const { return reduced_; }
  Index reduced_dim() const { return reduced_.dim(); }

  Frame apply(const Frame& L) const;

private:
  SymplecticSpace ambient_;
  Tolerances tol_;
  Mat V_;        // isotropic frame (orthonormal columns)
  Mat U_;        // complement of V inside V^sigma (orthonormal columns)
  Mat E_;        // U * C, Darboux basis of the induced form on span(U)
  Mat C_;        // coordinates of E in the U basis
  SymplecticSpace reduced_;
};

inline Frame symplectic_reduce(const Frame& L, const Frame& V,
                               const Tolerances& tol = default_tols()) {
  return SymplecticReduction(V, tol).apply(L);
}

}  // namespace symidx
