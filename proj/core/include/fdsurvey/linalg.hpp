#pragma once

#include <cstddef>
#include <vector>

#include "fdsurvey/matrix.hpp"

namespace fdsurvey {

/// Square matrix validated symmetric on construction.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;

  /// Throws ValidationError unless square, finite, and |m_ij - m_ji| <= rel_tol * max|m|.
  /// The stored entries are exactly symmetric (upper triangle mirrored).
  explicit SymmetricMatrix(Matrix m, double rel_tol = 1e-12);

  /// Averages m with its transpose. For matrices that are symmetric up to
  /// floating-point roundoff by construction.
  static SymmetricMatrix symmetrized(const Matrix& m);

  static SymmetricMatrix identity(std::size_t n) { return SymmetricMatrix(Matrix::identity(n)); }
  static SymmetricMatrix zeros(std::size_t n) { return SymmetricMatrix(Matrix(n, n)); }

  std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }
  std::vector<double> diagonal() const { return m_.diagonal_values(); }

  SymmetricMatrix scaled(double s) const;

 private:
  Matrix m_;
};

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]
};

/// Cyclic Jacobi eigendecomposition.
EigenDecomposition sym_eigen(const SymmetricMatrix& m);

/// V diag(f(eta)) V'.
SymmetricMatrix spectral_reconstruct(const EigenDecomposition& eig, const std::vector<double>& values);

/// Largest absolute eigenvalue.
double spectral_norm(const SymmetricMatrix& m);

/// Result of flooring the spectrum of a non-negative matrix at a > 0 and
/// inverting it.
struct RegularizedInverse {
  SymmetricMatrix regularized;  // sum_j max(eta_j, a) v_j v_j'; the input itself when no floor applied
  SymmetricMatrix inverse;      // sum_j max(eta_j, a)^{-1} v_j v_j'
  bool floor_applied = false;   // true iff some eigenvalue < a
  double floor = 0.0;
  double min_eigenvalue = 0.0;
};

/// Throws ValidationError when a <= 0 or when m has an eigenvalue below
/// -1e-10 * max|eta| (m must be non-negative).
RegularizedInverse regularized_inverse(const SymmetricMatrix& m, double a);

/// Plain inverse of a symmetric positive definite matrix via its spectrum.
/// Throws SingularMatrixError when the smallest eigenvalue is
/// <= rel_threshold * trace(m) / dim.
SymmetricMatrix spd_inverse(const SymmetricMatrix& m, double rel_threshold = 1e-12);

/// Clips negative eigenvalues to zero. Returns the input unchanged when it has
/// no negative eigenvalue.
SymmetricMatrix psd_project(const SymmetricMatrix& m);

/// Relative tolerance used to decide positive semidefiniteness:
/// eigenvalues >= -kPsdTolerance * max|eta| count as non-negative.
inline constexpr double kPsdTolerance = 1e-10;

/// Factor L with L L' = m. L is the lower-triangular Cholesky factor whenever
/// m is numerically positive definite; rank-deficient inputs fall back to the
/// eigen factor V sqrt(eta) (still exact, no longer triangular). Throws
/// NumericalError naming the most negative eigenvalue when m is indefinite
/// beyond kPsdTolerance.
Matrix cholesky_psd(const SymmetricMatrix& m);

}  // namespace fdsurvey
