#include "flea/spinchain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "flea/errors.hpp"
#include "flea/parallel.hpp"

namespace flea::spin {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

void scale(Vec& a, double s) {
  for (auto& v : a) v *= s;
}

void project_out(const std::vector<Vec>& basis, Vec& w) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) axpy(-dot(b, w), b, w);
  }
}

// Upper bound on ||H||.
double norm_bound(const ChainSpec& spec, const std::optional<SpinFlea>& flea) {
  const int bonds = spec.boundary == Boundary::Ring ? spec.N : spec.N - 1;
  double b = bonds + std::abs(spec.B) * spec.N;
  if (flea) b += std::abs(flea->epsilon);
  return b;
}

}  // namespace

void ChainSpec::validate() const {
  if (N < 2 || N > 14) throw DomainError("chain length must satisfy 2 <= N <= 14");
  if (!std::isfinite(B)) throw DomainError("field strength must be finite");
  if (boundary == Boundary::Ring && N < 3) throw DomainError("ring boundary needs N >= 3");
}

std::vector<double> diagonal_energies(const ChainSpec& spec, const std::optional<SpinFlea>& flea) {
  spec.validate();
  const std::size_t dim = spec.dim();
  if (flea && flea->basis_index >= dim) throw DomainError("flea basis index outside [0, 2^N)");
  const int N = spec.N;
  const int bonds = spec.boundary == Boundary::Ring ? N : N - 1;
  Vec diag(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    auto s = [&](int i) { return ((b >> i) & 1u) ? -1.0 : 1.0; };
    double e = 0.0;
    for (int i = 0; i < bonds; ++i) e -= s(i) * s((i + 1) % N);
    if (spec.variant == Variant::AsPrinted) {
      e -= spec.B * static_cast<double>(N - 2 * std::popcount(b));
    }
    diag[b] = e;
  }
  if (flea) diag[flea->basis_index] += flea->epsilon;
  return diag;
}

namespace {

void apply_with(const ChainSpec& spec, const Vec& diag, const Vec& x, Vec& y, std::size_t workers) {
  const std::size_t dim = diag.size();
  if (x.size() != dim) throw DomainError("state dimension differs from 2^N");
  y.assign(dim, 0.0);
  const bool transverse = spec.variant == Variant::TransverseField;
  const std::size_t block = 1024;
  const std::size_t blocks = (dim + block - 1) / block;
  parallel_map(blocks, workers, [&](std::size_t k) {
    const std::size_t hi = std::min(dim, (k + 1) * block);
    for (std::size_t b = k * block; b < hi; ++b) {
      double v = diag[b] * x[b];
      if (transverse) {
        double flips = 0.0;
        for (int i = 0; i < spec.N; ++i) flips += x[b ^ (std::size_t{1} << i)];
        v -= spec.B * flips;
      }
      y[b] = v;
    }
    return 0;
  });
}

}  // namespace

void apply_hamiltonian(const ChainSpec& spec, const std::optional<SpinFlea>& flea, const Vec& x, Vec& y,
                       std::size_t workers) {
  apply_with(spec, diagonal_energies(spec, flea), x, y, workers);
}

std::vector<double> enumerate_spectrum(const ChainSpec& spec, const std::optional<SpinFlea>& flea) {
  if (spec.variant != Variant::AsPrinted) throw DomainError("enumeration needs the diagonal variant");
  Vec d = diagonal_energies(spec, flea);
  std::sort(d.begin(), d.end());
  return d;
}

namespace {

struct Pair {
  double value;
  Vec vec;
  double residual;
  std::size_t iterations;
  std::size_t restarts;
};

// Lowest eigenpair of H restricted to the complement of `locked`.
Pair lowest_deflated(const ChainSpec& spec, const std::optional<SpinFlea>& flea, const std::vector<Vec>& locked,
                     std::size_t workers, double tol_abs, std::mt19937_64& rng) {
  const std::size_t dim = spec.dim();
  const std::size_t free_dim = dim - locked.size();
  const std::size_t max_krylov = std::min<std::size_t>(free_dim, 300);
  const std::size_t max_restarts = 30;
  const double hnorm = norm_bound(spec, flea);
  const Vec diag = diagonal_energies(spec, flea);

  std::normal_distribution<double> gauss;
  Vec start(dim);
  for (auto& v : start) v = gauss(rng);

  Pair out{0.0, {}, 0.0, 0, 0};
  for (std::size_t restart = 0; restart <= max_restarts; ++restart) {
    project_out(locked, start);
    double nrm = norm(start);
    if (nrm == 0.0) throw ConvergenceError("Lanczos start vector vanished after deflation", out.iterations, 0.0);
    scale(start, 1.0 / nrm);

    std::vector<Vec> V{start};
    std::vector<double> alpha, beta;
    Vec w;
    Eigen::VectorXd ritz;
    for (std::size_t j = 0; j < max_krylov; ++j) {
      apply_with(spec, diag, V[j], w, workers);
      ++out.iterations;
      project_out(locked, w);
      const double a = dot(V[j], w);
      alpha.push_back(a);
      axpy(-a, V[j], w);
      if (j > 0) axpy(-beta[j - 1], V[j - 1], w);
      project_out(V, w);
      const double b = norm(w);

      const auto m = static_cast<Eigen::Index>(alpha.size());
      const bool last = j + 1 == max_krylov || b <= 1e-13 * hnorm;
      if (last || j % 5 == 4) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        Eigen::VectorXd dg = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sub = Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1);
        tri.computeFromTridiagonal(dg, sub, Eigen::ComputeEigenvectors);
        ritz = tri.eigenvectors().col(0);
        if (last || b * std::abs(ritz(m - 1)) < 0.1 * tol_abs) break;
      }
      beta.push_back(b);
      scale(w, 1.0 / b);
      V.push_back(w);
    }

    Vec x(dim, 0.0);
    for (Eigen::Index i = 0; i < ritz.size(); ++i) axpy(ritz(i), V[static_cast<std::size_t>(i)], x);
    project_out(locked, x);
    scale(x, 1.0 / norm(x));
    Vec hx;
    apply_with(spec, diag, x, hx, workers);
    project_out(locked, hx);
    const double rq = dot(x, hx);
    axpy(-rq, x, hx);
    out.value = rq;
    out.residual = norm(hx);
    out.vec = std::move(x);
    out.restarts = restart;
    if (out.residual <= tol_abs) return out;
    start = out.vec;
  }
  std::ostringstream os;
  os << "Lanczos pair " << locked.size() << " missed tolerance after " << max_restarts
     << " restarts (residual " << out.residual << ")";
  throw ConvergenceError(os.str(), out.iterations, out.residual);
}

}  // namespace

ChainAnalysis chain_ground_analysis(const ChainSpec& spec, const std::optional<SpinFlea>& flea, std::size_t k,
                                    std::size_t workers, double tol, std::uint64_t seed) {
  spec.validate();
  if (k < 1 || k > 6) throw DomainError("chain analysis needs 1 <= k <= 6");
  if (flea && flea->basis_index >= spec.dim()) throw DomainError("flea basis index outside [0, 2^N)");
  k = std::min(k, spec.dim());
  const double tol_abs = tol * norm_bound(spec, flea);
  std::mt19937_64 rng(seed);

  ChainAnalysis out;
  std::vector<Vec> locked;
  std::vector<double> values;
  for (std::size_t n = 0; n < k; ++n) {
    Pair p = lowest_deflated(spec, flea, locked, workers, tol_abs, rng);
    out.iterations += p.iterations;
    out.restarts += p.restarts;
    out.worst_residual = std::max(out.worst_residual, p.residual);
    values.push_back(p.value);
    locked.push_back(std::move(p.vec));
  }

  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  const int N = spec.N;
  for (std::size_t i : order) {
    out.energies.push_back(values[i]);
    std::vector<double> w(static_cast<std::size_t>(N) + 1, 0.0);
    const Vec& v = locked[i];
    for (std::size_t b = 0; b < v.size(); ++b) w[static_cast<std::size_t>(std::popcount(b))] += v[b] * v[b];
    out.sector_weights.push_back(std::move(w));
    out.states.push_back(v);
  }
  if (k >= 2) out.splitting = out.energies[1] - out.energies[0];
  double m = 0.0;
  for (int d = 0; d <= N; ++d) m += out.sector_weights[0][static_cast<std::size_t>(d)] * (N - 2 * d);
  out.polarization = std::abs(m) / N;
  return out;
}

}  // namespace flea::spin
