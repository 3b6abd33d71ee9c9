#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "flea/core.hpp"

namespace flea {

/// Uniform cells over [p_min, p_max] x [q_min, q_max]; samples sit at cell
/// centers (midpoint rule).
struct PhaseSpaceGrid {
  double p_min = -3.0, p_max = 3.0;
  double q_min = -2.0, q_max = 2.0;
  std::size_t n_p = 128, n_q = 128;

  double dp() const { return (p_max - p_min) / static_cast<double>(n_p); }
  double dq() const { return (q_max - q_min) / static_cast<double>(n_q); }
  double cell_area() const { return dp() * dq(); }
  double p(std::size_t i) const { return p_min + (static_cast<double>(i) + 0.5) * dp(); }
  double q(std::size_t j) const { return q_min + (static_cast<double>(j) + 0.5) * dq(); }
  void validate() const;

  // Default window [-3, 3] x [-2a, 2a] at 128 x 128.
  static PhaseSpaceGrid standard(double a = 1.0);
};

struct PhaseSpacePoint {
  double p;
  double q;
};

/// Density per cell, index i_p * n_q + i_q.
struct PhaseSpaceMeasure {
  PhaseSpaceGrid grid;
  std::vector<double> density;

  double at(std::size_t ip, std::size_t iq) const { return density[ip * grid.n_q + iq]; }
  double mass() const;
  double integrate(const std::function<double(double, double)>& f) const;
  PhaseSpacePoint mean() const;
  PhaseSpacePoint argmax() const;
};

/// Compactly supported f(p, q); evaluation is zero outside the box.
struct TestFunction {
  std::function<double(double, double)> f;
  double p_lo, p_hi, q_lo, q_hi;

  double operator()(double p, double q) const {
    if (p < p_lo || p > p_hi || q < q_lo || q > q_hi) return 0.0;
    return f(p, q);
  }
  // Constant 1 on the whole phase-space window.
  static TestFunction constant(const PhaseSpaceGrid& g, double value = 1.0);
  // (1 - r^2 / R^2)^2 for r < R around (p0, q0).
  static TestFunction bump(PhaseSpacePoint center, double radius);
  // q^power restricted to the window.
  static TestFunction q_power(const PhaseSpaceGrid& g, int power);
};

struct ClassicalState {
  std::vector<std::pair<PhaseSpacePoint, double>> atoms;

  void validate() const;  // nonnegative weights summing to 1
  double pair(const TestFunction& f) const;

  // 1/2 delta(0, a) + 1/2 delta(0, -a).
  static ClassicalState symmetric_mixture(double a);
  static ClassicalState point(PhaseSpacePoint at);
};

WaveFunction coherent_state(double p, double q, double hbar, const Grid& grid);

// <p> via the central-difference derivative, -i hbar d/dx.
double momentum_expectation(const WaveFunction& psi, double hbar);

/// Husimi density <Phi_pq, rho Phi_pq> / (2 pi hbar) on the cells of pgrid.
/// Throws CoverageError when the captured mass is below kHusimiCoverage.
inline constexpr double kHusimiCoverage = 0.999;
PhaseSpaceMeasure husimi_measure(const WaveFunction& psi, double hbar, const PhaseSpaceGrid& pgrid,
                                 std::size_t workers = 1);
// rho as a grid kernel rho_jk with h * trace = 1.
PhaseSpaceMeasure husimi_measure(const Eigen::MatrixXcd& rho, const Grid& grid, double hbar,
                                 const PhaseSpaceGrid& pgrid, std::size_t workers = 1);

/// Dense Q_hbar(f) acting on grid amplitudes (midpoint rule over pgrid cells).
/// Applying it to a state means y_j = h * sum_k Q_jk psi_k.
Eigen::MatrixXcd berezin_quantize(const TestFunction& f, double hbar, const Grid& grid,
                                  const PhaseSpaceGrid& pgrid);

// Q_hbar(f) psi without forming the matrix.
WaveFunction berezin_apply(const TestFunction& f, double hbar, const PhaseSpaceGrid& pgrid,
                           const WaveFunction& psi);

struct ConvergenceRow {
  double hbar;
  double pairing;
  double limit_pairing;
  double abs_error;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool monotone_decreasing = false;
};

/// |int f d mu_hbar - sum w_i f(atom_i)| per hbar, in the given order (which
/// must decrease). `grid_for` supplies the phase-space window per hbar.
ConvergenceTable weak_convergence_check(const std::vector<double>& hbar_values,
                                        const std::function<WaveFunction(double)>& state_family,
                                        const TestFunction& f, const ClassicalState& limit,
                                        const std::function<PhaseSpaceGrid(double)>& grid_for,
                                        std::size_t workers = 1);

// Classical double-well energy p^2 / 2m + (lambda / 8)(q^2 - a^2)^2.
double classical_energy(const ModelParams& params, double p, double q);

}  // namespace flea
