#pragma once

#include <Eigen/Dense>

namespace phdinf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Dense symmetric matrix. The stored form is exactly symmetric: the upper
/// triangle is mirrored into the lower one on construction.
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Validates that `m` is square, finite and symmetric to 1e-12 (absolute).
  explicit SymMatrix(const Matrix& m);

  /// Averages `m` with its transpose. For matrices that are symmetric in exact
  /// arithmetic but carry rounding asymmetry (products such as S⁻¹·M·S⁻¹).
  static SymMatrix symmetrize(const Matrix& m);
  static SymMatrix identity(Index p);
  static SymMatrix zero(Index p);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

 private:
  struct Unchecked {};
  SymMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}

  Matrix m_;
};

/// Eigenpairs sorted by descending |λ|; column k of `vectors` pairs with
/// `values[k]`. Each column is sign-canonical: its largest-magnitude entry is
/// positive (lowest index on exact ties).
struct EigenSystem {
  Vector values;
  Matrix vectors;
};

/// Orthonormal p×K column set spanning a subspace.
class Basis {
 public:
  Basis() = default;

  /// Validates orthonormality of the columns to 1e-10.
  explicit Basis(const Matrix& columns);

  Index dim() const { return cols_.rows(); }
  Index rank() const { return cols_.cols(); }
  const Matrix& columns() const { return cols_; }
  Vector column(Index k) const { return cols_.col(k); }

  /// P_S = ΓΓᵀ.
  SymMatrix projector() const;

 private:
  Matrix cols_;
};

/// Cyclic Jacobi eigendecomposition.
EigenSystem sym_eigen(const SymMatrix& a);

/// Symmetric inverse square root via the eigendecomposition. Requires the
/// smallest eigenvalue to exceed 1e-12 times the largest.
SymMatrix inv_sqrt(const SymMatrix& a);

/// Symmetric square root of a positive definite matrix.
SymMatrix sqrt_spd(const SymMatrix& a);

/// Inverse of a symmetric positive definite matrix (Cholesky).
SymMatrix inverse_spd(const SymMatrix& a);

/// I_p − ΓΓᵀ.
SymMatrix residual_projector(const Basis& b);

/// ‖(I − P_S)v‖ for unit `v`: the sine of the angle between v and span(b).
double sine_to_subspace(const Vector& v, const Basis& b);

/// Largest absolute entry.
double max_abs(const Matrix& m);

}  // namespace phdinf
