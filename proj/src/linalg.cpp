#include "phdinf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "phdinf/error.hpp"

namespace phdinf {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kOrthoTol = 1e-10;
constexpr int kMaxSweeps = 100;

bool all_finite(const Matrix& m) { return m.allFinite(); }

void canonicalize_sign(Eigen::Ref<Vector> v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (v[best] < 0.0) v = -v;
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    fail(ErrorKind::InvalidMatrix, "matrix must be square and non-empty");
  }
  if (!all_finite(m)) fail(ErrorKind::InvalidMatrix, "matrix has non-finite entries");
  if (max_abs(m - m.transpose()) > kSymmetryTol) {
    fail(ErrorKind::InvalidMatrix, "matrix is not symmetric");
  }
  m_ = m.triangularView<Eigen::Upper>();
  m_.triangularView<Eigen::StrictlyLower>() = m_.transpose().triangularView<Eigen::StrictlyLower>();
}

SymMatrix SymMatrix::symmetrize(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    fail(ErrorKind::InvalidMatrix, "matrix must be square and non-empty");
  }
  if (!all_finite(m)) fail(ErrorKind::InvalidMatrix, "matrix has non-finite entries");
  Matrix s = 0.5 * (m + m.transpose());
  return SymMatrix(std::move(s), Unchecked{});
}

SymMatrix SymMatrix::identity(Index p) { return SymMatrix(Matrix::Identity(p, p), Unchecked{}); }

SymMatrix SymMatrix::zero(Index p) { return SymMatrix(Matrix::Zero(p, p), Unchecked{}); }

Basis::Basis(const Matrix& columns) : cols_(columns) {
  if (cols_.rows() == 0 || cols_.cols() > cols_.rows()) {
    fail(ErrorKind::InvalidMatrix, "basis must be p x K with 1 <= p and K <= p");
  }
  if (!all_finite(cols_)) fail(ErrorKind::InvalidMatrix, "basis has non-finite entries");
  const Matrix gram = cols_.transpose() * cols_;
  if (max_abs(gram - Matrix::Identity(gram.rows(), gram.cols())) > kOrthoTol) {
    fail(ErrorKind::InvalidMatrix, "basis columns are not orthonormal");
  }
}

SymMatrix Basis::projector() const { return SymMatrix::symmetrize(cols_ * cols_.transpose()); }

EigenSystem sym_eigen(const SymMatrix& sym) {
  const Index p = sym.dim();
  Matrix a = sym.matrix();
  if (!a.allFinite()) fail(ErrorKind::InvalidMatrix, "matrix has non-finite entries");
  Matrix v = Matrix::Identity(p, p);

  const double total = a.squaredNorm();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Index i = 0; i < p; ++i)
      for (Index j = i + 1; j < p; ++j) off += a(i, j) * a(i, j);
    if (off == 0.0 || off <= 1e-34 * total) break;

    for (Index ip = 0; ip < p; ++ip) {
      for (Index iq = ip + 1; iq < p; ++iq) {
        const double apq = a(ip, iq);
        if (apq == 0.0) continue;
        const double app = a(ip, ip);
        const double aqq = a(iq, iq);
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Index k = 0; k < p; ++k) {
          if (k == ip || k == iq) continue;
          const double akp = a(k, ip);
          const double akq = a(k, iq);
          a(k, ip) = a(ip, k) = c * akp - s * akq;
          a(k, iq) = a(iq, k) = s * akp + c * akq;
        }
        a(ip, ip) = app - t * apq;
        a(iq, iq) = aqq + t * apq;
        a(ip, iq) = a(iq, ip) = 0.0;

        for (Index k = 0; k < p; ++k) {
          const double vkp = v(k, ip);
          const double vkq = v(k, iq);
          v(k, ip) = c * vkp - s * vkq;
          v(k, iq) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  const Vector diag = a.diagonal();
  std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) {
    const double al = std::abs(diag[l]);
    const double ar = std::abs(diag[r]);
    if (al != ar) return al > ar;
    if (diag[l] != diag[r]) return diag[l] > diag[r];
    return l < r;
  });

  EigenSystem out;
  out.values.resize(p);
  out.vectors.resize(p, p);
  for (Index k = 0; k < p; ++k) {
    out.values[k] = diag[order[static_cast<std::size_t>(k)]];
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    canonicalize_sign(out.vectors.col(k));
  }
  return out;
}

namespace {

// Positive definite eigensystem or NotPositiveDefinite.
EigenSystem spd_eigen(const SymMatrix& a) {
  EigenSystem es = sym_eigen(a);
  const double top = es.values.maxCoeff();
  const double bottom = es.values.minCoeff();
  if (!(top > 0.0) || !(bottom > 1e-12 * top)) {
    std::ostringstream msg;
    msg << "matrix is not positive definite (eigenvalue " << bottom << ")";
    fail(ErrorKind::NotPositiveDefinite, msg.str());
  }
  return es;
}

}  // namespace

SymMatrix inv_sqrt(const SymMatrix& a) {
  const EigenSystem es = spd_eigen(a);
  const Vector scale = es.values.cwiseSqrt().cwiseInverse();
  return SymMatrix::symmetrize(es.vectors * scale.asDiagonal() * es.vectors.transpose());
}

SymMatrix sqrt_spd(const SymMatrix& a) {
  const EigenSystem es = spd_eigen(a);
  const Vector scale = es.values.cwiseSqrt();
  return SymMatrix::symmetrize(es.vectors * scale.asDiagonal() * es.vectors.transpose());
}

SymMatrix inverse_spd(const SymMatrix& a) {
  const Eigen::LLT<Matrix> llt(a.matrix());
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::NotPositiveDefinite, "Cholesky factorization failed");
  }
  return SymMatrix::symmetrize(llt.solve(Matrix::Identity(a.dim(), a.dim())));
}

SymMatrix residual_projector(const Basis& b) {
  const Matrix& g = b.columns();
  return SymMatrix::symmetrize(Matrix::Identity(b.dim(), b.dim()) - g * g.transpose());
}

double sine_to_subspace(const Vector& v, const Basis& b) {
  if (v.size() != b.dim()) fail(ErrorKind::InvalidVector, "vector dimension mismatch");
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-10) {
    fail(ErrorKind::InvalidVector, "vector must have unit norm");
  }
  const Vector resid = v - b.columns() * (b.columns().transpose() * v);
  return std::clamp(resid.norm(), 0.0, 1.0);
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace phdinf
