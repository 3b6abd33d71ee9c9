#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "flea/core.hpp"
#include "flea/spectral.hpp"

namespace flea {

// scale(t) = 0 before t_on, epsilon from t_on on.
struct Quench {
  double epsilon;
  double t_on = 0.0;
};

// scale(t) = sin(pi t / 2T) up to T, then 1.
struct SinRamp {
  double T;
};

// Piecewise constant scale; an independent N(0, amplitude^2 dt_noise)
// increment is added at the start of each dt_noise interval.
struct WhiteNoise {
  double amplitude;
  double dt_noise;
  std::uint64_t seed;
};

// Scale jumps by kick_scale * N(0, 1) at exponential waiting times.
struct PoissonKicks {
  double rate;
  double kick_scale;
  std::uint64_t seed;
};

/// Time profile multiplying a fixed flea shape. Noise paths are drawn once
/// at construction up to `horizon`; later times hold the last value.
class RampSchedule {
 public:
  using Kind = std::variant<Quench, SinRamp, WhiteNoise, PoissonKicks>;

  RampSchedule(Kind kind, PerturbationSpec flea, double horizon = 1e4);

  double scale(double t) const;
  double max_abs_scale(double t_end) const;
  const Kind& kind() const { return kind_; }
  const PerturbationSpec& flea() const { return flea_; }

  static RampSchedule off(PerturbationSpec flea) { return RampSchedule(Quench{0.0, 0.0}, std::move(flea)); }

 private:
  Kind kind_;
  PerturbationSpec flea_;
  std::vector<double> jump_times_;
  std::vector<double> jump_values_;
};

struct Observables {
  double norm;
  double energy;
  double left_well_probability;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<WaveFunction> states;  // empty when states were not kept
  std::vector<Observables> observables;
  TridiagOperator base;
  std::vector<double> flea_values;
  double dt = 0.0;
};

struct PropagateOptions {
  std::size_t stride = 1;  // record every stride-th step (plus t = 0 and the end)
  bool keep_states = true;
  bool backward = false;   // integrate from t_end back to 0 (dt still > 0)
  std::optional<WellPartition> partition;  // default: cut at x = 0
};

inline constexpr double kNormDriftLimit = 1e-6;

/// Crank-Nicolson propagation of psi0 under base + scale(t) * flea. The scale
/// is sampled at each step's midpoint. Requires dt * max|E| < 0.1 with max|E|
/// bounded by the Gershgorin radius of the largest-scale operator.
Trajectory propagate(const WaveFunction& psi0, const TridiagOperator& base, const RampSchedule& schedule,
                     double dt, double t_end, const PropagateOptions& options = {});

struct QuenchStudyConfig {
  ModelParams params;
  PerturbationSpec flea;
  Grid grid;
  double dt;
  std::size_t sample_stride = 10;
  double window_level = 0.95;
};

struct QuenchStats {
  double epsilon = 0.0;
  double time_averaged_p_left = 0.0;
  double max_sustained_window = 0.0;  // longest run with p_left > window_level
  double window_fraction = 0.0;       // max_sustained_window / horizon
  double perturbed_period = 0.0;      // 2 pi hbar / (E1 - E0) of base + eps flea
  double min_p_left = 0.0;
  double max_p_left = 0.0;
};

// Symmetric ground state quenched by eps * flea at t = 0, one trajectory per
// epsilon. Throws DomainError when horizon < 10 perturbed periods.
std::vector<QuenchStats> quench_localization_study(const QuenchStudyConfig& config,
                                                   const std::vector<double>& epsilons, double horizon,
                                                   std::size_t workers = 1);

// Dynamics defaults: a coarse grid that keeps dt * max|E| < 0.1 affordable.
Grid dynamics_grid(const ModelParams& params);
inline constexpr double kDynamicsXi = 0.25;
inline constexpr double kDynamicsDt = 4e-4;

struct CoefficientSeries {
  std::vector<double> times;
  std::vector<std::vector<cplx>> c;  // c[t][n]
  std::vector<std::vector<double>> energies;

  double weight(std::size_t t, std::size_t n) const { return std::norm(c[t][n]); }
};

/// c_n(t) = <psi_n(t), Psi(t)> exp((i / hbar) int_0^t E_n ds) in the
/// instantaneous eigenbasis of base + scale(t) flea. Eigensolves are cached on
/// the scale value; eigenvector signs are kept continuous between samples.
CoefficientSeries instantaneous_coefficients(const Trajectory& traj, const RampSchedule& schedule, std::size_t k);

// <psi_n | d psi_n / dt> by central differences of the instantaneous
// eigenvectors at time t (real eigenbasis, so ideally zero).
double gauge_term(const TridiagOperator& base, const RampSchedule& schedule, std::size_t n, double t,
                  double h = 1e-4);

inline constexpr double kAdiabaticFraction = 0.01;

struct AdiabaticReport {
  double delta0 = 0.0;
  double matrix_element = 0.0;  // |<psi_1(0)| W |psi_0(0)>|
  double c1dot0 = 0.0;          // pi / (2 T delta0) * matrix_element
  double gamma = 0.0;           // matrix_element / delta0
  double T = 0.0;
  double T_required = 0.0;      // smallest T with c1dot0 <= 0.01 delta0 / hbar
  double criterion = kAdiabaticFraction;
};

AdiabaticReport adiabatic_report(const ModelParams& params, const PerturbationSpec& flea, double T,
                                 const Grid& grid);
AdiabaticReport adiabatic_report(const ModelParams& params, const PerturbationSpec& flea, double T);

// Flea of the collapse-time scan: the default shape, scaled so the n = 12
// shrink delocalizes across kGammaHbarMin..kGammaHbarMax.
inline constexpr double kCollapseFleaHeight = 2e-12;
inline constexpr double kGammaHbarMin = 0.0125;
inline constexpr double kGammaHbarMax = 0.025;
PerturbationSpec collapse_flea(const ModelParams& params);
std::vector<double> gamma_hbar_grid(std::size_t count = 9);

struct GammaPoint {
  double hbar = 0.0;
  double delta = 0.0;
  double matrix_element = 0.0;
  double gamma = 0.0;
  double log10_gamma = 0.0;
  double shrunk_max_well_probability = 0.0;  // ground state of base + 10^-n W
};

struct GammaScan {
  std::vector<GammaPoint> points;
  std::vector<double> excluded_hbar;
  double slope = 0.0;      // d log10 Gamma / d (1 / hbar)
  double intercept = 0.0;
  double r_squared = 0.0;
  int shrink_exponent = 12;
};

/// Gamma = |<psi_1|W|psi_0>| / Delta per hbar (m = 1, default lambda, a), with
/// a least-squares fit of log10 Gamma against 1 / hbar. The shrunk-flea
/// ground state uses the two-level reduction inside the parity doublet.
GammaScan gamma_scan(const std::vector<double>& hbar_values, const PerturbationSpec& flea,
                     int shrink_exponent = 12, std::size_t workers = 1,
                     const ModelParams& shape = ModelParams{});

}  // namespace flea
