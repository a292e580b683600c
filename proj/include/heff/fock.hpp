#pragma once

// Truncated Fock-space realization of normal-ordered polynomials and dense
// Hermitian eigendecomposition with a fixed phase convention.

#include <Eigen/Dense>

#include "heff/errors.hpp"
#include "heff/polynomial.hpp"

namespace heff {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Per-mode occupation cutoffs; mode m keeps occupations 0..nmax[m].
struct FockTruncation {
  std::vector<int> nmax;

  FockTruncation() = default;
  explicit FockTruncation(std::vector<int> cutoffs) : nmax(std::move(cutoffs)) {
    for (int c : nmax)
      if (c < 0) throw std::invalid_argument("FockTruncation: negative cutoff");
  }
  static FockTruncation uniform(int n_modes, int cutoff) {
    return FockTruncation(std::vector<int>(n_modes, cutoff));
  }

  int n_modes() const { return int(nmax.size()); }

  long dim() const {
    long d = 1;
    for (int c : nmax) d *= long(c) + 1;
    return d;
  }

  // row-major over modes: mode 0 is the slowest index
  long index(const std::vector<int>& occ) const {
    if (int(occ.size()) != n_modes())
      throw std::invalid_argument("FockTruncation: occupation arity mismatch");
    long idx = 0;
    for (int m = 0; m < n_modes(); ++m) {
      if (occ[m] < 0 || occ[m] > nmax[m])
        throw std::out_of_range("FockTruncation: occupation outside cutoff");
      idx = idx * (nmax[m] + 1) + occ[m];
    }
    return idx;
  }

  std::vector<int> occupation(long idx) const {
    std::vector<int> occ(n_modes());
    for (int m = n_modes() - 1; m >= 0; --m) {
      occ[m] = int(idx % (nmax[m] + 1));
      idx /= nmax[m] + 1;
    }
    return occ;
  }
};

// Matrix element <occ + raise - lower| a†^raise a^lower |occ> of one mode factor.
// Returns 0 when the lowering underflows; the caller handles cutoff projection.
inline double ladder_element(int occ, int raise, int lower) {
  if (occ < lower) return 0.0;
  double v = 1.0;
  for (int i = 0; i < lower; ++i) v *= double(occ - i);        // a^lower
  for (int i = 0; i < raise; ++i) v *= double(occ - lower + i + 1);  // a†^raise
  return std::sqrt(v);
}

// Dense realization. Truncation acts by projection: matrix elements whose
// target occupation exceeds the cutoff are dropped.
inline Matrix realize(const ModePolynomial& p, const FockTruncation& trunc) {
  if (p.n_modes() != trunc.n_modes())
    throw std::invalid_argument("realize: mode count mismatch");
  const long d = trunc.dim();
  Matrix out = Matrix::Zero(d, d);
  for (const auto& [mono, coeff] : p.terms()) {
    for (long col = 0; col < d; ++col) {
      std::vector<int> occ = trunc.occupation(col);
      double amp = 1.0;
      bool ok = true;
      for (int m = 0; m < trunc.n_modes(); ++m) {
        const int target = occ[m] - mono[m].lower + mono[m].raise;
        if (occ[m] < mono[m].lower || target > trunc.nmax[m]) {
          ok = false;
          break;
        }
        amp *= ladder_element(occ[m], mono[m].raise, mono[m].lower);
        occ[m] = target;
      }
      if (!ok || amp == 0.0) continue;
      out(trunc.index(occ), col) += coeff * amp;
    }
  }
  return out;
}

// Normalized coherent state on the truncated space.
// Cutoff should be at least |alpha|^2 + 6*sqrt(|alpha|^2 + 1) for small tails.
inline Vector coherent_state(Complex alpha, int cutoff) {
  Vector v(cutoff + 1);
  // amplitudes alpha^n / sqrt(n!) via the stable recurrence
  v(0) = 1.0;
  for (int n = 1; n <= cutoff; ++n) v(n) = v(n - 1) * alpha / std::sqrt(double(n));
  v.normalize();
  return v;
}

struct Eigensystem {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;          // columns; phase: largest-|component| entry real positive
};

// Hermitian eigendecomposition with deterministic phases.
// Throws PhysicsError if the matrix is not Hermitian to tolerance.
inline Eigensystem eigendecompose(const Matrix& M, double herm_tol = 1e-12) {
  const double scale = std::max(1.0, M.norm());
  if ((M - M.adjoint()).norm() > herm_tol * scale)
    throw PhysicsError("eigendecompose: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(M);
  if (solver.info() != Eigen::Success)
    throw InternalError("eigendecompose: solver failed to converge");
  Eigensystem es{solver.eigenvalues(), solver.eigenvectors()};
  for (long k = 0; k < es.vectors.cols(); ++k) {
    long imax = 0;
    double best = 0.0;
    for (long i = 0; i < es.vectors.rows(); ++i) {
      const double a = std::abs(es.vectors(i, k));
      if (a > best * (1.0 + 1e-12)) {  // deterministic tie-break: first index wins
        best = a;
        imax = i;
      }
    }
    const Complex z = es.vectors(imax, k);
    if (std::abs(z) > 0.0) es.vectors.col(k) *= std::conj(z) / std::abs(z);
  }
  return es;
}

inline Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (long i = 0; i < A.rows(); ++i)
    for (long j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

}  // namespace heff
