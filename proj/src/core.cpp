#include "symidx/core.hpp"

namespace symidx {

Mat darboux_basis_from_gram(const Mat& G, const Tolerances& tol) {
  const Index k = G.rows();
  if (k != G.cols() || k % 2 != 0)
    throw schema_error("core", "Darboux basis needs a square even-dimensional Gram matrix");
  if ((G + G.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, G.cwiseAbs().maxCoeff()))
    throw precondition_error("core", "Gram matrix is not skew-symmetric");
  const Index m = k / 2;
  const double scale = std::max(1.0, G.cwiseAbs().maxCoeff());

  // Symplectic Gram-Schmidt with full pivoting on the pairing magnitude.
  Mat pool = Mat::Identity(k, k);
  Index live = k;
  Mat es(k, m), fs(k, m);
  auto omega = [&](const Vec& u, const Vec& v) -> double { return u.dot(G * v); };

  for (Index pair = 0; pair < m; ++pair) {
    Mat P = pool.leftCols(live);
    Mat W = P.transpose() * G * P;
    Index bi = 0, bj = 0;
    double best = -1.0;
    for (Index i = 0; i < live; ++i)
      for (Index j = 0; j < live; ++j)
        if (std::abs(W(i, j)) > best) { best = std::abs(W(i, j)); bi = i; bj = j; }
    if (best <= std::max(tol.rank_floor, 1e-12 * scale))
      throw precondition_error("core", "induced form is degenerate; cannot build Darboux basis");
    Vec e = P.col(bi);
    Vec f = P.col(bj) / W(bi, bj);
    es.col(pair) = e;
    fs.col(pair) = f;
    // Project the remaining pool onto the skew-orthogonal complement of (e, f).
    Index w = 0;
    Mat next(k, live);
    for (Index i = 0; i < live; ++i) {
      if (i == bi || i == bj) continue;
      Vec v = P.col(i);
      v = v + omega(f, v) * e - omega(e, v) * f;
      next.col(w++) = v;
    }
    pool.leftCols(w) = next.leftCols(w);
    live = w;
  }
  Mat E(k, k);
  E << es, fs;
  return E;
}

Mat darboux_transform(const Frame& L0, const Frame& L2, const Tolerances& tol) {
  const SymplecticSpace& sp = L0.space;
  const Index two_n = sp.dim();
  const Index n = two_n / 2;
  if (L2.space.dim() != two_n)
    throw schema_error("core", "darboux_transform frames live in different spaces");
  if (!is_lagrangian(L0, tol.symplectic_defect) || !is_lagrangian(L2, tol.symplectic_defect))
    throw precondition_error("core", "darboux_transform requires Lagrangian frames");

  const Mat Om = sp.form.transpose();  // sigma(u, v) = u^T Om v
  Mat A = L0.cols;                     // orthonormal basis of L0
  Mat G = L2.cols.transpose() * Om * A;
  Eigen::FullPivLU<Mat> lu(G.transpose());
  if (!lu.isInvertible())
    throw precondition_error("core", "darboux_transform requires transversal Lagrangians");
  Mat B = L2.cols * lu.solve(Mat::Identity(n, n));  // B^T Om A = I

  Mat P(two_n, two_n);
  P << B, A;  // P maps vertical block to L2, horizontal block to L0
  return P.inverse();
}

SymplecticReduction::SymplecticReduction(const Frame& V, const Tolerances& tol)
    : ambient_(V.space), tol_(tol) {
  if (!is_isotropic(V, tol.symplectic_defect))
    throw precondition_error("core", "symplectic reduction requires an isotropic subspace");
  V_ = V.cols;
  Frame vperp = skew_complement(V, tol);
  // Complement of V inside V^sigma (V is contained in V^sigma by isotropy).
  Mat proj = vperp.cols;
  if (V_.cols() > 0) proj -= V_ * (V_.transpose() * vperp.cols);
  U_ = orthonormal_span<double>(proj, tol);
  const Index k = U_.cols();
  if (k % 2 != 0)
    throw precondition_error("core", "reduction produced an odd-dimensional quotient");
  if (k == 0) {
    C_ = Mat(0, 0);
    E_ = Mat(ambient_.dim(), 0);
    reduced_ = SymplecticSpace{Mat(0, 0), ambient_.complex_field};
    return;
  }
  Mat G = U_.transpose() * ambient_.form.transpose() * U_;
  C_ = darboux_basis_from_gram(G, tol);
  E_ = U_ * C_;
  reduced_ = SymplecticSpace::standard(k, ambient_.complex_field);
}

Frame SymplecticReduction::apply(const Frame& L) const {
  if (L.space.dim() != ambient_.dim())
    throw schema_error("core", "reduction applied to a frame from another space");
  if (reduced_.dim() == 0) return Frame{reduced_, Mat(0, 0)};
  Frame vperp_frame{ambient_, U_.cols() > 0 || V_.cols() > 0
                                  ? sum_spans<double>(V_, U_, tol_)
                                  : Mat::Identity(ambient_.dim(), ambient_.dim())};
  Frame W = intersect(L, vperp_frame, tol_);
  if (W.dim() == 0) return Frame{reduced_, Mat(reduced_.dim(), 0)};
  // w = V a + U c with c = U^T w; reduced coordinates r solve C r = c.
  Mat c = U_.transpose() * W.cols;
  Mat r = C_.partialPivLu().solve(c);
  return make_frame(reduced_, r, tol_);
}

}  // namespace symidx
