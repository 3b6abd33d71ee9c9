#include "flea/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "flea/errors.hpp"

namespace flea::tridiag {

template <class Real>
Real Matrix<Real>::norm_bound() const {
  const std::size_t n = size();
  Real best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Real r = std::abs(d[i]);
    if (i > 0) r += std::abs(e[i - 1]);
    if (i + 1 < n) r += std::abs(e[i]);
    if (i == 0 || i + 1 == n) r += std::abs(corner);
    best = std::max(best, r);
  }
  return best;
}

namespace {

template <class Real>
Real pivot_floor(const Matrix<Real>& m) {
  return std::numeric_limits<Real>::min() / std::numeric_limits<Real>::epsilon() *
         std::max<Real>(1, m.norm_bound());
}

template <class Real>
Real guard(Real q, Real floor) {
  return std::abs(q) < floor ? -floor : q;
}

template <class Real>
std::size_t count_open(const Real* d, const Real* e, std::size_t n, Real sigma, Real floor) {
  std::size_t neg = 0;
  Real q = guard(d[0] - sigma, floor);
  if (q < 0) ++neg;
  for (std::size_t i = 1; i < n; ++i) {
    q = guard(d[i] - sigma - e[i - 1] * e[i - 1] / q, floor);
    if (q < 0) ++neg;
  }
  return neg;
}

// Banded LU with partial pivoting for an open chain (LAPACK gttrf layout).
template <class Real>
struct ChainLU {
  std::vector<Real> dl, dd, du, du2;
  std::vector<char> swapped;

  ChainLU(const Real* d, const Real* e, std::size_t n, Real sigma, Real floor)
      : dl(e, e + (n ? n - 1 : 0)), dd(n), du(e, e + (n ? n - 1 : 0)),
        du2(n > 2 ? n - 2 : 0, Real(0)), swapped(n, 0) {
    for (std::size_t i = 0; i < n; ++i) dd[i] = d[i] - sigma;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(dd[i]) >= std::abs(dl[i])) {
        if (dd[i] == 0) dd[i] = floor;
        const Real f = dl[i] / dd[i];
        dl[i] = f;
        dd[i + 1] -= f * du[i];
      } else {
        const Real f = dd[i] / dl[i];
        dd[i] = dl[i];
        dl[i] = f;
        const Real tmp = du[i];
        du[i] = dd[i + 1];
        dd[i + 1] = tmp - f * dd[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -f * du[i + 1];
        }
        swapped[i] = 1;
      }
    }
    if (n && dd[n - 1] == 0) dd[n - 1] = floor;
  }

  void solve(Real* b, std::size_t n) const {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (swapped[i]) {
        const Real tmp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = tmp - dl[i] * b[i + 1];
      } else {
        b[i + 1] -= dl[i] * b[i];
      }
    }
    for (std::size_t k = n; k-- > 0;) {
      Real v = b[k];
      if (k + 1 < n) v -= du[k] * b[k + 1];
      if (k + 2 < n) v -= du2[k] * b[k + 2];
      b[k] = v / dd[k];
    }
  }
};

// Solver for (T - sigma) x = b, with T cyclic handled by bordering node 0.
template <class Real>
class ShiftedSolver {
 public:
  ShiftedSolver(const Matrix<Real>& m, Real sigma, Real floor)
      : n_(m.size()), cyclic_(m.corner != 0 && m.size() > 2),
        lu_(cyclic_ ? m.d.data() + 1 : m.d.data(), cyclic_ ? m.e.data() + 1 : m.e.data(),
            cyclic_ ? n_ - 1 : n_, sigma, floor) {
    if (!cyclic_) return;
    border_.assign(n_ - 1, Real(0));
    border_.front() += m.e[0];
    border_.back() += m.corner;
    z_ = border_;
    lu_.solve(z_.data(), n_ - 1);
    Real dot = 0;
    for (std::size_t i = 0; i < n_ - 1; ++i) dot += border_[i] * z_[i];
    schur_ = m.d[0] - sigma - dot;
    if (schur_ == 0) schur_ = floor;
  }

  void solve(std::vector<Real>& x) const {
    if (!cyclic_) {
      lu_.solve(x.data(), n_);
      return;
    }
    Real* y = x.data() + 1;
    lu_.solve(y, n_ - 1);
    Real dot = 0;
    for (std::size_t i = 0; i < n_ - 1; ++i) dot += border_[i] * y[i];
    const Real x0 = (x[0] - dot) / schur_;
    for (std::size_t i = 0; i < n_ - 1; ++i) y[i] -= z_[i] * x0;
    x[0] = x0;
  }

 private:
  std::size_t n_;
  bool cyclic_;
  ChainLU<Real> lu_;
  std::vector<Real> border_, z_;
  Real schur_ = 0;
};

std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

template <class Real>
Real norm2(const std::vector<Real>& v) {
  Real s = 0;
  for (Real x : v) s += x * x;
  return std::sqrt(s);
}

template <class Real>
Real residual(const Matrix<Real>& m, Real lambda, const std::vector<Real>& v) {
  const std::size_t n = m.size();
  Real s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Real r = (m.d[i] - lambda) * v[i];
    if (i > 0) r += m.e[i - 1] * v[i - 1];
    if (i + 1 < n) r += m.e[i] * v[i + 1];
    if (m.corner != 0 && n > 2) {
      if (i == 0) r += m.corner * v[n - 1];
      if (i + 1 == n) r += m.corner * v[0];
    }
    s += r * r;
  }
  return std::sqrt(s);
}

}  // namespace

template <class Real>
std::size_t count_below(const Matrix<Real>& m, Real sigma) {
  const std::size_t n = m.size();
  const Real floor = pivot_floor(m);
  if (m.corner == 0 || n <= 2) return count_open(m.d.data(), m.e.data(), n, sigma, floor);

  // Pivots of the open chain on nodes 1..n-1, then the Schur complement of
  // node 0 against that chain (Sylvester's law of inertia).
  std::size_t neg = 0;
  const Real* d = m.d.data() + 1;
  const Real* e = m.e.data() + 1;
  const std::size_t k = n - 1;
  Real q = 0;
  Real w = 0;
  Real schur = m.d[0] - sigma;
  for (std::size_t i = 0; i < k; ++i) {
    Real b = 0;
    if (i == 0) b += m.e[0];
    if (i + 1 == k) b += m.corner;
    if (i == 0) {
      q = guard(d[0] - sigma, floor);
      w = b;
    } else {
      const Real f = e[i - 1] / q;
      q = guard(d[i] - sigma - e[i - 1] * f, floor);
      w = b - f * w;
    }
    if (q < 0) ++neg;
    schur -= w * w / q;
  }
  if (guard(schur, floor) < 0) ++neg;
  return neg;
}

template <class Real>
Real eigenvalue(const Matrix<Real>& m, std::size_t k) {
  const std::size_t n = m.size();
  if (k >= n) throw DomainError("eigenvalue index out of range");
  Real lo = std::numeric_limits<Real>::max();
  Real hi = std::numeric_limits<Real>::lowest();
  for (std::size_t i = 0; i < n; ++i) {
    Real r = 0;
    if (i > 0) r += std::abs(m.e[i - 1]);
    if (i + 1 < n) r += std::abs(m.e[i]);
    if (i == 0 || i + 1 == n) r += std::abs(m.corner);
    lo = std::min(lo, m.d[i] - r);
    hi = std::max(hi, m.d[i] + r);
  }
  const Real span = hi - lo;
  lo -= span * Real(1e-6) + 1;
  hi += span * Real(1e-6) + 1;
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real abs_floor = pivot_floor(m) * 4;
  for (int it = 0; it < 400; ++it) {
    const Real mid = lo + (hi - lo) / 2;
    if (!(mid > lo && mid < hi)) break;
    if (hi - lo <= 2 * eps * std::max(std::abs(lo), std::abs(hi)) + abs_floor) break;
    if (count_below(m, mid) >= k + 1) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo + (hi - lo) / 2;
}

template <class Real>
std::vector<Real> eigenvector(const Matrix<Real>& m, Real lambda, std::size_t seed,
                              const std::vector<const std::vector<Real>*>& previous,
                              std::size_t iterations) {
  const std::size_t n = m.size();
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real floor = std::max(eps * m.norm_bound(), pivot_floor(m));
  ShiftedSolver<Real> solver(m, lambda, floor);

  std::uint64_t state = 0x5DEECE66Dull + 7919ull * seed;
  std::vector<Real> v(n);
  for (auto& x : v) {
    x = static_cast<Real>(static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53) - Real(0.5);
  }
  auto project_out = [&](std::vector<Real>& x) {
    for (const auto* p : previous) {
      Real dot = 0;
      for (std::size_t i = 0; i < n; ++i) dot += (*p)[i] * x[i];
      for (std::size_t i = 0; i < n; ++i) x[i] -= dot * (*p)[i];
    }
    const Real nrm = norm2(x);
    for (auto& y : x) y /= nrm;
  };
  project_out(v);
  for (std::size_t it = 0; it < iterations; ++it) {
    solver.solve(v);
    project_out(v);
  }

  // Sign convention: the leftmost significant lobe is positive.
  Real vmax = 0;
  for (Real x : v) vmax = std::max(vmax, std::abs(x));
  for (Real x : v) {
    if (std::abs(x) >= Real(0.1) * vmax) {
      if (x < 0) {
        for (auto& y : v) y = -y;
      }
      break;
    }
  }
  return v;
}

template <class Real>
Eigenpairs<Real> lowest(const Matrix<Real>& m, std::size_t k, Real tol) {
  const std::size_t n = m.size();
  if (k == 0 || k > n) throw DomainError("requested eigenpair count out of range");
  Eigenpairs<Real> out;
  out.values.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.values[i] = eigenvalue(m, i);

  const Real norm = std::max<Real>(m.norm_bound(), std::numeric_limits<Real>::min());
  const Real cluster = Real(1e-3) * norm;
  out.vectors.reserve(k);
  constexpr std::size_t kIterations = 4;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<const std::vector<Real>*> prev;
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(out.values[j] - out.values[i]) <= cluster) prev.push_back(&out.vectors[j]);
    }
    out.vectors.push_back(eigenvector(m, out.values[i], i, prev, kIterations));
    const Real r = residual(m, out.values[i], out.vectors.back());
    out.worst_residual = std::max(out.worst_residual, r / norm);
  }
  out.iterations = kIterations;
  if (!(out.worst_residual <= tol)) {
    std::ostringstream os;
    os << "inverse iteration residual " << static_cast<double>(out.worst_residual)
       << " exceeds tolerance " << static_cast<double>(tol);
    throw ConvergenceError(os.str(), out.iterations, static_cast<double>(out.worst_residual));
  }
  return out;
}

#define FLEA_INSTANTIATE(R)                                                         \
  template struct Matrix<R>;                                                        \
  template std::size_t count_below<R>(const Matrix<R>&, R);                         \
  template R eigenvalue<R>(const Matrix<R>&, std::size_t);                          \
  template Eigenpairs<R> lowest<R>(const Matrix<R>&, std::size_t, R);               \
  template std::vector<R> eigenvector<R>(const Matrix<R>&, R, std::size_t,          \
                                         const std::vector<const std::vector<R>*>&, \
                                         std::size_t);

FLEA_INSTANTIATE(double)
FLEA_INSTANTIATE(long double)

#undef FLEA_INSTANTIATE

}  // namespace flea::tridiag
