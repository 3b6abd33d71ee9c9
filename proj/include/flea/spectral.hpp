#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "flea/core.hpp"

namespace flea {

/// Ascending eigenpairs of a discretized Hamiltonian. States are real with a
/// deterministic sign (leftmost significant lobe positive).
struct EigenSystem {
  std::vector<double> energies;
  std::vector<WaveFunction> states;
  ModelParams params;
  double worst_residual = 0.0;
  // Set when the operator is mirror symmetric: E1 - E0 from the exact
  // even/odd identity, free of eigenvalue cancellation.
  std::optional<double> doublet_splitting;
  bool parity_resolved = false;

  std::size_t size() const { return energies.size(); }
};

inline constexpr double kDefaultEigenTol = 1e-10;
// Difference splittings below this fraction of |E0| are treated as noise.
inline constexpr double kSplittingFloor = 1e-13;

// Largest |H - P H P| entry, where P reflects the grid about its center.
double reflection_commutator(const TridiagOperator& h);

/// Lowest k eigenpairs. Mirror-symmetric Dirichlet operators are split into
/// even and odd sectors and solved in extended precision, so near-degenerate
/// tunnelling doublets come out as clean parity eigenstates.
EigenSystem lowest_eigenpairs(const TridiagOperator& h, std::size_t k,
                              double tol = kDefaultEigenTol);

// E1 - E0 (never negative). Uses the parity identity when available.
double energy_splitting(const EigenSystem& es);

// nullopt when a difference-based splitting is below kSplittingFloor * |E0|.
std::optional<double> resolved_splitting(const EigenSystem& es);

/// Tunnelling action between the two minima: integral of sqrt(2 m (V - V_min)).
/// Minima are located on `grid` and refined on the continuous potential.
double wkb_action(const PotentialSpec& potential, const ModelParams& params, const Grid& grid);
double wkb_action(const PotentialSpec& potential, const ModelParams& params);

struct SplittingPoint {
  double hbar;
  double splitting;
};

struct SplittingFit {
  double prefactor = 0.0;  // C in  Delta / hbar = C exp(-d / hbar)
  double d_fit = 0.0;
  double r_squared = 0.0;
  std::vector<SplittingPoint> points;
  std::vector<double> excluded_hbar;  // unresolved doublets
};

// Least squares of log(Delta / hbar) against 1 / hbar. Needs >= 5 resolved
// points with distinct hbar, else ConvergenceError.
SplittingFit splitting_scan(const std::vector<ModelParams>& params_list,
                            const PotentialSpec& potential, const Grid& grid,
                            std::size_t workers = 1);

/// Ascending cut points; well i is [cut_{i-1}, cut_i) with the grid ends as
/// outer limits. A periodic partition instead maps x to
/// floor((x - origin) / width) mod count.
struct WellPartition {
  std::vector<double> cuts;
  double origin = 0.0;
  double width = 0.0;
  std::size_t count = 0;

  std::size_t wells() const { return width > 0 ? count : cuts.size() + 1; }
  std::size_t well_of(double x) const;
};

// Cuts at local maxima of the base potential between its wells.
WellPartition partition_for(const PotentialSpec& potential, const Grid& grid);

std::vector<double> well_probability(const WaveFunction& psi, const WellPartition& partition);

struct SensitivityCurve {
  double xi = 0.0;
  std::vector<double> epsilon;
  std::vector<double> left_well_probability;
};

inline constexpr double kDefaultFleaHeight = 100.0;

// Default flea: parabolic bump filling the right well, support [0, 2a].
PerturbationSpec default_flea(const ModelParams& params, double height = kDefaultFleaHeight);

// Default semiclassical grid: [-4a, 4a], 2048 Dirichlet points.
Grid default_grid(const ModelParams& params);

SensitivityCurve flea_sensitivity_sweep(const ModelParams& params, const PerturbationSpec& flea,
                                        const std::vector<double>& epsilons, const Grid& grid,
                                        std::size_t workers = 1);
SensitivityCurve flea_sensitivity_sweep(const ModelParams& params, const PerturbationSpec& flea,
                                        const std::vector<double>& epsilons);

// First epsilon (in sweep order from large to small) bracketing p_left = level,
// interpolated in log epsilon. nullopt when the curve never crosses.
std::optional<double> crossing_epsilon(const SensitivityCurve& curve, double level);

struct NWellSystem {
  PotentialSpec potential;
  Grid grid;
  WellPartition partition;
  EigenSystem system;
};

// Lowest 4 eigenpairs of V_b cos^2(pi x / 2a) on the periodic box [-n a, n a).
NWellSystem nwell_spectrum(const ModelParams& params, int n_wells,
                           const std::vector<PerturbationSpec>& fleas,
                           std::size_t points_per_well = 256);

// Symmetric double well of `params` with optional fleas.
PotentialSpec double_well(const ModelParams& params);

/// Ground state of base + eps W when eps W is far below the doublet gap to
/// the rest of the spectrum: exact diagonalization inside the unperturbed
/// parity doublet. Valid while eps |W| << hbar omega.
struct DoubletGround {
  double p_left = 0.0;
  double max_well_probability = 0.0;
  double mixing_angle = 0.0;  // ground = cos * psi0 + sin * psi1
};

DoubletGround doublet_ground_state(const EigenSystem& symmetric, const std::vector<double>& flea,
                                   double eps);

double matrix_element(const WaveFunction& bra, std::span<const double> w, const WaveFunction& ket);

}  // namespace flea
