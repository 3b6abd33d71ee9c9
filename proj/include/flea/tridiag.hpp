#pragma once

// Symmetric tridiagonal (optionally cyclic) eigensolver: Sturm-sequence
// bisection for eigenvalues, inverse iteration for eigenvectors. The cyclic
// corner is handled by bordering the open chain with node 0 and tracking the
// Schur complement, so both counts and solves stay O(n).

#include <cstddef>
#include <vector>

namespace flea::tridiag {

template <class Real>
struct Matrix {
  std::vector<Real> d;  // diagonal, size n
  std::vector<Real> e;  // couplings (i, i+1), size n-1
  Real corner = 0;      // coupling (0, n-1)

  std::size_t size() const { return d.size(); }
  Real norm_bound() const;
};

template <class Real>
struct Eigenpairs {
  std::vector<Real> values;
  std::vector<std::vector<Real>> vectors;  // unit Euclidean norm
  Real worst_residual = 0;
  std::size_t iterations = 0;
};

// Number of eigenvalues strictly below sigma.
template <class Real>
std::size_t count_below(const Matrix<Real>& m, Real sigma);

// k-th smallest eigenvalue (0-based) to full working precision.
template <class Real>
Real eigenvalue(const Matrix<Real>& m, std::size_t k);

// Lowest k eigenpairs. Throws ConvergenceError when any residual
// ||T v - lambda v|| exceeds tol * ||T||.
template <class Real>
Eigenpairs<Real> lowest(const Matrix<Real>& m, std::size_t k, Real tol);

// Unit eigenvector for a known eigenvalue; `previous` vectors inside the
// eigenvalue's cluster are projected out.
template <class Real>
std::vector<Real> eigenvector(const Matrix<Real>& m, Real lambda, std::size_t seed,
                              const std::vector<const std::vector<Real>*>& previous,
                              std::size_t iterations = 4);

}  // namespace flea::tridiag
