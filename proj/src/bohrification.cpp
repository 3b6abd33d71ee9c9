#include "flea/bohrification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "flea/parallel.hpp"

namespace flea {

namespace {

// e^{-(x-q)^2 / 2 hbar} drops below 1e-17 beyond this many sqrt(hbar).
constexpr double kWindow = 8.9;

struct Window {
  std::size_t lo, hi;  // [lo, hi)
};

Window window_for(const Grid& grid, double q, double hbar) {
  const double r = kWindow * std::sqrt(hbar);
  const double h = grid.spacing();
  const double a = std::ceil((q - r - grid.x_min()) / h);
  const double b = std::floor((q + r - grid.x_min()) / h);
  const auto lo = static_cast<std::size_t>(std::clamp(a, 0.0, static_cast<double>(grid.size())));
  const auto hi = static_cast<std::size_t>(std::clamp(b + 1.0, 0.0, static_cast<double>(grid.size())));
  return {lo, std::max(lo, hi)};
}

// S_i = sum_j e^{-i p_i x_j / hbar} e^{-(x_j - q)^2 / 2 hbar} psi_j for all p_i.
std::vector<cplx> coherent_sums(std::span<const cplx> psi, const Grid& grid, double q, double hbar,
                                const PhaseSpaceGrid& pg) {
  const Window w = window_for(grid, q, hbar);
  const std::size_t m = w.hi - w.lo;
  std::vector<cplx> z(m), r(m);
  for (std::size_t t = 0; t < m; ++t) {
    const double x = grid.x(w.lo + t);
    const double d = x - q;
    z[t] = std::exp(-d * d / (2.0 * hbar)) * psi[w.lo + t] * std::polar(1.0, -pg.p(0) * x / hbar);
    r[t] = std::polar(1.0, -pg.dp() * x / hbar);
  }
  std::vector<cplx> s(pg.n_p);
  for (std::size_t i = 0; i < pg.n_p; ++i) {
    cplx acc = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
      acc += z[t];
      z[t] *= r[t];
    }
    s[i] = acc;
  }
  return s;
}

double norm_sq_const(double hbar) { return 1.0 / std::sqrt(std::numbers::pi * hbar); }

void check_coverage(const PhaseSpaceMeasure& m) {
  const double mass = m.mass();
  if (mass < kHusimiCoverage) {
    std::ostringstream os;
    os << "phase-space window captures mass " << mass << " < " << kHusimiCoverage;
    throw CoverageError(os.str(), mass);
  }
}

}  // namespace

void PhaseSpaceGrid::validate() const {
  if (!(p_max > p_min) || !(q_max > q_min) || n_p == 0 || n_q == 0) {
    throw DomainError("phase-space grid needs positive cell areas");
  }
}

PhaseSpaceGrid PhaseSpaceGrid::standard(double a) { return PhaseSpaceGrid{-3.0, 3.0, -2.0 * a, 2.0 * a, 128, 128}; }

double PhaseSpaceMeasure::mass() const {
  double s = 0.0;
  for (double d : density) s += d;
  return s * grid.cell_area();
}

double PhaseSpaceMeasure::integrate(const std::function<double(double, double)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.n_p; ++i) {
    for (std::size_t j = 0; j < grid.n_q; ++j) s += f(grid.p(i), grid.q(j)) * at(i, j);
  }
  return s * grid.cell_area();
}

PhaseSpacePoint PhaseSpaceMeasure::mean() const {
  const double m = mass();
  return {integrate([](double p, double) { return p; }) / m, integrate([](double, double q) { return q; }) / m};
}

PhaseSpacePoint PhaseSpaceMeasure::argmax() const {
  const auto it = std::max_element(density.begin(), density.end());
  const auto k = static_cast<std::size_t>(it - density.begin());
  return {grid.p(k / grid.n_q), grid.q(k % grid.n_q)};
}

TestFunction TestFunction::constant(const PhaseSpaceGrid& g, double value) {
  return {[value](double, double) { return value; }, g.p_min, g.p_max, g.q_min, g.q_max};
}

TestFunction TestFunction::bump(PhaseSpacePoint c, double radius) {
  if (!(radius > 0)) throw DomainError("bump radius must be positive");
  return {[c, radius](double p, double q) {
            const double r2 = ((p - c.p) * (p - c.p) + (q - c.q) * (q - c.q)) / (radius * radius);
            return r2 < 1.0 ? (1.0 - r2) * (1.0 - r2) : 0.0;
          },
          c.p - radius, c.p + radius, c.q - radius, c.q + radius};
}

TestFunction TestFunction::q_power(const PhaseSpaceGrid& g, int power) {
  return {[power](double, double q) { return std::pow(q, power); }, g.p_min, g.p_max, g.q_min, g.q_max};
}

void ClassicalState::validate() const {
  double s = 0.0;
  for (const auto& [pt, w] : atoms) {
    if (w < 0) throw DomainError("classical state weights must be nonnegative");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-15) throw DomainError("classical state weights must sum to 1");
}

double ClassicalState::pair(const TestFunction& f) const {
  double s = 0.0;
  for (const auto& [pt, w] : atoms) s += w * f(pt.p, pt.q);
  return s;
}

ClassicalState ClassicalState::symmetric_mixture(double a) { return {{{{0.0, a}, 0.5}, {{0.0, -a}, 0.5}}}; }

ClassicalState ClassicalState::point(PhaseSpacePoint at) { return {{{at, 1.0}}}; }

WaveFunction coherent_state(double p, double q, double hbar, const Grid& grid) {
  if (!(hbar > 0)) throw DomainError("coherent_state needs hbar > 0");
  // |Phi|^2 is a normal density with variance hbar / 2.
  const double s = std::sqrt(hbar);
  const double tail = 0.5 * std::erfc((q - grid.x_min()) / s) + 0.5 * std::erfc((grid.x_max() - q) / s);
  if (tail > 1e-8) {
    std::ostringstream os;
    os << "coherent state at q = " << q << " leaks mass " << tail << " past the grid";
    throw DomainError(os.str());
  }
  const double norm = std::pow(std::numbers::pi * hbar, -0.25);
  std::vector<cplx> amp(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.x(j);
    const double d = x - q;
    amp[j] = norm * std::polar(std::exp(-d * d / (2.0 * hbar)), (p * x - 0.5 * p * q) / hbar);
  }
  return WaveFunction(grid, std::move(amp));
}

double momentum_expectation(const WaveFunction& psi, double hbar) {
  const double h = psi.grid().spacing();
  const std::size_t n = psi.size();
  cplx s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx next = j + 1 < n ? psi[j + 1] : cplx(0.0);
    const cplx prev = j > 0 ? psi[j - 1] : cplx(0.0);
    s += std::conj(psi[j]) * (next - prev) / (2.0 * h);
  }
  return (cplx(0.0, -hbar) * s * h).real();
}

PhaseSpaceMeasure husimi_measure(const WaveFunction& psi, double hbar, const PhaseSpaceGrid& pgrid,
                                 std::size_t workers) {
  pgrid.validate();
  const Grid& grid = psi.grid();
  const double h = grid.spacing();
  const double scale = norm_sq_const(hbar) * h * h / (2.0 * std::numbers::pi * hbar);
  const auto cols = parallel_map(pgrid.n_q, workers, [&](std::size_t iq) {
    return coherent_sums(psi.amplitudes(), grid, pgrid.q(iq), hbar, pgrid);
  });
  PhaseSpaceMeasure m{pgrid, std::vector<double>(pgrid.n_p * pgrid.n_q)};
  for (std::size_t ip = 0; ip < pgrid.n_p; ++ip) {
    for (std::size_t iq = 0; iq < pgrid.n_q; ++iq) m.density[ip * pgrid.n_q + iq] = scale * std::norm(cols[iq][ip]);
  }
  check_coverage(m);
  return m;
}

PhaseSpaceMeasure husimi_measure(const Eigen::MatrixXcd& rho, const Grid& grid, double hbar,
                                 const PhaseSpaceGrid& pgrid, std::size_t workers) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (rho.rows() != n || rho.cols() != n) throw DomainError("density kernel does not match the grid");
  const double h = grid.spacing();
  const Eigen::MatrixXcd op = 0.5 * h * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(op);
  PhaseSpaceMeasure total{pgrid, std::vector<double>(pgrid.n_p * pgrid.n_q, 0.0)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = eig.eigenvalues()(i);
    if (lam < 1e-14) continue;
    std::vector<cplx> v(eig.eigenvectors().col(i).data(), eig.eigenvectors().col(i).data() + n);
    const WaveFunction psi(grid, std::move(v));
    const double h2 = norm_sq_const(hbar) * h * h / (2.0 * std::numbers::pi * hbar);
    const auto cols = parallel_map(pgrid.n_q, workers, [&](std::size_t iq) {
      return coherent_sums(psi.amplitudes(), grid, pgrid.q(iq), hbar, pgrid);
    });
    for (std::size_t ip = 0; ip < pgrid.n_p; ++ip) {
      for (std::size_t iq = 0; iq < pgrid.n_q; ++iq) {
        total.density[ip * pgrid.n_q + iq] += lam * h2 * std::norm(cols[iq][ip]);
      }
    }
  }
  check_coverage(total);
  return total;
}

Eigen::MatrixXcd berezin_quantize(const TestFunction& f, double hbar, const Grid& grid, const PhaseSpaceGrid& pgrid) {
  pgrid.validate();
  if (f.p_lo < pgrid.p_min || f.p_hi > pgrid.p_max || f.q_lo < pgrid.q_min || f.q_hi > pgrid.q_max) {
    throw CoverageError("test function support leaves the phase-space window", 0.0);
  }
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  const double w = pgrid.cell_area() / (2.0 * std::numbers::pi * hbar) * norm_sq_const(hbar);
  Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> g(n);
  std::vector<cplx> F(n);
  for (std::size_t iq = 0; iq < pgrid.n_q; ++iq) {
    const double q = pgrid.q(iq);
    // F(m) = sum_p f(p, q) e^{i p m h / hbar}, m = j - k >= 0.
    bool any = false;
    std::fill(F.begin(), F.end(), cplx(0.0));
    for (std::size_t ip = 0; ip < pgrid.n_p; ++ip) {
      const double fv = f(pgrid.p(ip), q);
      if (fv == 0.0) continue;
      any = true;
      const cplx step = std::polar(1.0, pgrid.p(ip) * h / hbar);
      cplx z = fv;
      for (std::size_t m = 0; m < n; ++m) {
        F[m] += z;
        z *= step;
      }
    }
    if (!any) continue;
    const Window win = window_for(grid, q, hbar);
    for (std::size_t j = win.lo; j < win.hi; ++j) {
      const double d = grid.x(j) - q;
      g[j] = std::exp(-d * d / (2.0 * hbar));
    }
    for (std::size_t j = win.lo; j < win.hi; ++j) {
      for (std::size_t k = win.lo; k <= j; ++k) {
        Q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) += w * g[j] * g[k] * F[j - k];
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto J = static_cast<Eigen::Index>(j);
    Q(J, J) = Q(J, J).real();
    for (std::size_t k = 0; k < j; ++k) {
      const auto K = static_cast<Eigen::Index>(k);
      Q(K, J) = std::conj(Q(J, K));
    }
  }
  return Q;
}

WaveFunction berezin_apply(const TestFunction& f, double hbar, const PhaseSpaceGrid& pgrid, const WaveFunction& psi) {
  pgrid.validate();
  const Grid& grid = psi.grid();
  const double h = grid.spacing();
  const double w = pgrid.cell_area() / (2.0 * std::numbers::pi * hbar) * norm_sq_const(hbar);
  const auto sums = parallel_map(pgrid.n_q, 1, [&](std::size_t iq) {
    return coherent_sums(psi.amplitudes(), grid, pgrid.q(iq), hbar, pgrid);
  });
  std::vector<cplx> out(grid.size(), 0.0);
  for (std::size_t iq = 0; iq < pgrid.n_q; ++iq) {
    const double q = pgrid.q(iq);
    const Window win = window_for(grid, q, hbar);
    for (std::size_t ip = 0; ip < pgrid.n_p; ++ip) {
      const double fv = f(pgrid.p(ip), q);
      if (fv == 0.0) continue;
      const cplx c = w * fv * h * sums[iq][ip];
      const double p = pgrid.p(ip);
      for (std::size_t j = win.lo; j < win.hi; ++j) {
        const double d = grid.x(j) - q;
        out[j] += c * std::polar(std::exp(-d * d / (2.0 * hbar)), p * grid.x(j) / hbar);
      }
    }
  }
  return WaveFunction(grid, std::move(out), false);
}

ConvergenceTable weak_convergence_check(const std::vector<double>& hbar_values,
                                        const std::function<WaveFunction(double)>& state_family,
                                        const TestFunction& f, const ClassicalState& limit,
                                        const std::function<PhaseSpaceGrid(double)>& grid_for,
                                        std::size_t workers) {
  if (hbar_values.size() < 3) throw DomainError("weak_convergence_check needs at least three hbar values");
  for (std::size_t i = 1; i < hbar_values.size(); ++i) {
    if (!(hbar_values[i] < hbar_values[i - 1])) throw DomainError("hbar values must decrease");
  }
  limit.validate();
  const double target = limit.pair(f);
  ConvergenceTable table;
  for (double hbar : hbar_values) {
    const auto mu = husimi_measure(state_family(hbar), hbar, grid_for(hbar), workers);
    const double v = mu.integrate([&](double p, double q) { return f(p, q); });
    table.rows.push_back({hbar, v, target, std::abs(v - target)});
  }
  table.monotone_decreasing = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    if (!(table.rows[i].abs_error < table.rows[i - 1].abs_error)) table.monotone_decreasing = false;
  }
  return table;
}

double classical_energy(const ModelParams& params, double p, double q) {
  const double u = q * q - params.a * params.a;
  return p * p / (2.0 * params.mass) + params.lambda / 8.0 * u * u;
}

}  // namespace flea
