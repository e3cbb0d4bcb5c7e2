#include "fdsurvey/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fdsurvey/error.hpp"

namespace fdsurvey {

SymmetricMatrix::SymmetricMatrix(Matrix m, double rel_tol) {
  if (m.rows() != m.cols()) throw ValidationError("symmetric matrix must be square");
  if (!all_finite(m)) throw ValidationError("symmetric matrix has non-finite entries");
  const double scale = max_abs(m);
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > rel_tol * scale) {
        std::ostringstream os;
        os << "matrix is not symmetric at (" << i << ", " << j << "): " << m(i, j) << " vs "
           << m(j, i);
        throw ValidationError(os.str());
      }
      m(j, i) = m(i, j);
    }
  }
  m_ = std::move(m);
}

SymmetricMatrix SymmetricMatrix::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw ValidationError("symmetric matrix must be square");
  Matrix s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return SymmetricMatrix(std::move(s));
}

SymmetricMatrix SymmetricMatrix::scaled(double s) const {
  SymmetricMatrix out = *this;
  out.m_ *= s;
  return out;
}

namespace {

void rotate(Matrix& a, std::size_t i, std::size_t j, std::size_t k, std::size_t l, double s,
            double tau) {
  const double g = a(i, j);
  const double h = a(k, l);
  a(i, j) = g - s * (h + g * tau);
  a(k, l) = h + s * (g - h * tau);
}

}  // namespace

EigenDecomposition sym_eigen(const SymmetricMatrix& m) {
  const std::size_t n = m.dim();
  Matrix a = m.matrix();
  Matrix v = Matrix::identity(n);

  constexpr int kMaxSweeps = 100;
  for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::abs(a(p, q));
    if (off == 0.0) break;

    // Early sweeps only rotate the large entries.
    const double threshold = sweep < 4 ? 0.2 * off / static_cast<double>(n * n) : 0.0;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double g = 100.0 * std::abs(apq);
        if (sweep > 4 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        if (std::abs(apq) <= threshold) continue;

        const double h = a(q, q) - a(p, p);
        double t;
        if (std::abs(h) + g == std::abs(h)) {
          t = apq / h;
        } else {
          const double theta = 0.5 * h / apq;
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          rotate(a, r, p, r, q, s, tau);
          a(p, r) = a(r, p);
          a(q, r) = a(r, q);
        }
        for (std::size_t r = 0; r < n; ++r) rotate(v, r, p, r, q, s, tau);
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = v(r, order[j]);
  }
  return out;
}

SymmetricMatrix spectral_reconstruct(const EigenDecomposition& eig,
                                     const std::vector<double>& values) {
  const std::size_t n = eig.vectors.rows();
  if (values.size() != eig.vectors.cols()) throw ValidationError("spectrum size mismatch");
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < values.size(); ++k)
        s += eig.vectors(i, k) * values[k] * eig.vectors(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return SymmetricMatrix(std::move(out));
}

double spectral_norm(const SymmetricMatrix& m) {
  if (m.dim() == 0) return 0.0;
  const auto eig = sym_eigen(m);
  return std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
}

namespace {

double psd_slack(const std::vector<double>& values) {
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  return kPsdTolerance * scale;
}

}  // namespace

RegularizedInverse regularized_inverse(const SymmetricMatrix& m, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("regularization floor a must be positive");
  if (m.dim() == 0) throw ValidationError("regularized_inverse of an empty matrix");
  const auto eig = sym_eigen(m);
  const double min_eig = eig.values.back();
  if (min_eig < -psd_slack(eig.values)) {
    std::ostringstream os;
    os << "matrix is not non-negative definite (min eigenvalue " << min_eig << ")";
    throw ValidationError(os.str());
  }

  std::vector<double> floored(eig.values.size());
  std::vector<double> inverted(eig.values.size());
  bool floor_applied = false;
  for (std::size_t j = 0; j < eig.values.size(); ++j) {
    if (eig.values[j] < a) floor_applied = true;
    floored[j] = std::max(eig.values[j], a);
    inverted[j] = 1.0 / floored[j];
  }

  return RegularizedInverse{
      floor_applied ? spectral_reconstruct(eig, floored) : m,
      spectral_reconstruct(eig, inverted),
      floor_applied,
      a,
      min_eig,
  };
}

SymmetricMatrix spd_inverse(const SymmetricMatrix& m, double rel_threshold) {
  if (m.dim() == 0) throw ValidationError("inverse of an empty matrix");
  const auto eig = sym_eigen(m);
  const double min_eig = eig.values.back();
  const double threshold = rel_threshold * trace(m.matrix()) / static_cast<double>(m.dim());
  if (!(min_eig > threshold)) {
    std::ostringstream os;
    os << "matrix is singular: min eigenvalue " << min_eig << " <= threshold " << threshold;
    throw SingularMatrixError(os.str(), min_eig);
  }
  std::vector<double> inverted(eig.values.size());
  for (std::size_t j = 0; j < inverted.size(); ++j) inverted[j] = 1.0 / eig.values[j];
  return spectral_reconstruct(eig, inverted);
}

SymmetricMatrix psd_project(const SymmetricMatrix& m) {
  if (m.dim() == 0) return m;
  const auto eig = sym_eigen(m);
  if (eig.values.back() >= 0.0) return m;
  std::vector<double> clipped(eig.values.size());
  for (std::size_t j = 0; j < clipped.size(); ++j) clipped[j] = std::max(eig.values[j], 0.0);
  return spectral_reconstruct(eig, clipped);
}

namespace {

// Unpivoted Cholesky; false when a pivot is not comfortably positive.
bool try_cholesky(const Matrix& a, Matrix& l) {
  const std::size_t n = a.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
  if (!(max_diag > 0.0)) return false;
  const double tol = kPsdTolerance * max_diag;

  l = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    auto lj = l.row(j);
    for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
    if (!(d > tol)) return false;
    const double ljj = std::sqrt(d);
    lj[j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      auto li = l.row(i);
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      li[j] = s / ljj;
    }
  }
  return true;
}

}  // namespace

Matrix cholesky_psd(const SymmetricMatrix& m) {
  Matrix l;
  if (try_cholesky(m.matrix(), l)) return l;

  const auto eig = sym_eigen(m);
  const std::size_t n = m.dim();
  if (n > 0 && eig.values.back() < -psd_slack(eig.values)) {
    std::ostringstream os;
    os << "matrix is indefinite: eigenvalue " << eig.values.back()
       << " is below the semidefinite tolerance";
    throw NumericalError(os.str());
  }
  Matrix f(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double root = std::sqrt(std::max(eig.values[k], 0.0));
    for (std::size_t i = 0; i < n; ++i) f(i, k) = eig.vectors(i, k) * root;
  }
  return f;
}

}  // namespace fdsurvey
