#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "flea/errors.hpp"

namespace flea {

using cplx = std::complex<double>;

enum class Boundary { Dirichlet, Periodic };

/// Uniform 1D grid. Dirichlet grids include both endpoints; periodic grids
/// omit x_max, which is identified with x_min.
class Grid {
 public:
  Grid(double x_min, double x_max, std::size_t n_points, Boundary boundary);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return n_; }
  Boundary boundary() const { return boundary_; }
  double spacing() const { return h_; }
  double x(std::size_t j) const { return x_min_ + static_cast<double>(j) * h_; }
  std::vector<double> nodes() const;

  // True when node j mirrors node n-1-j about x = 0 (Dirichlet only).
  bool mirror_symmetric() const;

  bool operator==(const Grid&) const = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  Boundary boundary_;
  double h_;
};

Grid make_grid(double x_min, double x_max, std::size_t n_points, Boundary boundary);

/// Physical parameters of H = -(hbar^2/2m) d^2/dx^2 + (lambda/8)(x^2 - a^2)^2.
struct ModelParams {
  double hbar = 0.1;
  double mass = 1.0;
  double lambda = 1.0;
  double a = 1.0;

  double xi() const;
  double barrier_height() const;  // lambda a^4 / 8
  double spring_constant() const;  // lambda a^2
  double characteristic_length() const;
  void validate() const;

  // hbar = xi, m = 1 with the default well geometry.
  static ModelParams semiclassical(double xi, double lambda = 1.0, double a = 1.0);
};

struct ParabolicBump {
  double center;
  double half_width;
  double height;
};

struct GaussianBump {
  double center;
  double sigma;
  double height;
};

/// A localized perturbation. Gaussians are truncated at kGaussianCutoff sigma,
/// which defines their support.
class PerturbationSpec {
 public:
  static constexpr double kGaussianCutoff = 8.0;

  explicit PerturbationSpec(ParabolicBump b);
  explicit PerturbationSpec(GaussianBump b);

  double operator()(double x) const;
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  double height() const;
  const std::variant<ParabolicBump, GaussianBump>& shape() const { return shape_; }

  // Same shape with the height multiplied by factor.
  PerturbationSpec scaled(double factor) const;

 private:
  std::variant<ParabolicBump, GaussianBump> shape_;
  double lo_;
  double hi_;
};

struct SymmetricDoubleWell {
  double lambda;
  double a;
};

struct PeriodicCosSq {
  double barrier;  // V_b
  double a;
  int n_wells;
};

// V = omega^2 x^2 / 2 (unit mass).
struct Quadratic {
  double omega;
};

// Linear interpolation of samples spread uniformly over [x_lo, x_hi].
struct Custom {
  double x_lo;
  double x_hi;
  std::vector<double> values;
};

using PotentialBase = std::variant<SymmetricDoubleWell, PeriodicCosSq, Quadratic, Custom>;

struct ScaledPerturbation {
  PerturbationSpec shape;
  double scale = 1.0;
};

struct PotentialSpec {
  PotentialBase base;
  std::vector<ScaledPerturbation> perturbations;

  double base_value(double x) const;
  // Base plus all perturbations at their stored scales.
  double operator()(double x) const;

  PotentialSpec with(PerturbationSpec w, double scale = 1.0) const;
};

/// Pointwise potential on the grid. `scales`, when given, overrides the stored
/// perturbation scales index by index.
std::vector<double> eval_potential(const PotentialSpec& spec, const Grid& grid,
                                   std::optional<std::span<const double>> scales = std::nullopt);

std::vector<double> eval_perturbation(const PerturbationSpec& w, const Grid& grid);

/// Real symmetric three-term operator; `corner` couples the first and last
/// nodes on periodic grids and is zero otherwise.
struct TridiagOperator {
  Grid grid;
  std::vector<double> diag;
  std::vector<double> off;  // size n-1
  double corner = 0.0;
  double hopping = 0.0;     // t = hbar^2 / (2 m h^2)
  ModelParams params;

  std::size_t size() const { return diag.size(); }
  bool periodic() const { return grid.boundary() == Boundary::Periodic; }
  double entry(std::size_t i, std::size_t j) const;
  // Gershgorin bound on the spectral radius.
  double norm_bound() const;

  void apply(std::span<const double> x, std::span<double> y) const;
  void apply(std::span<const cplx> x, std::span<cplx> y) const;

  // Same kinetic part with potential values shifted by delta (pointwise).
  TridiagOperator shifted(std::span<const double> delta, double scale = 1.0) const;
};

TridiagOperator build_hamiltonian(const Grid& grid, std::span<const double> potential,
                                  const ModelParams& params);

/// Grid function with amplitudes normalized in the discrete L2 norm.
class WaveFunction {
 public:
  WaveFunction(Grid grid, std::vector<cplx> amplitudes, bool normalize = true);
  static WaveFunction from_real(Grid grid, std::span<const double> values, bool normalize = true);

  const Grid& grid() const { return grid_; }
  std::span<const cplx> amplitudes() const { return amp_; }
  std::size_t size() const { return amp_.size(); }
  cplx operator[](std::size_t j) const { return amp_[j]; }

  double norm() const;
  double density(std::size_t j) const { return std::norm(amp_[j]); }
  cplx inner(const WaveFunction& other) const;  // <this, other>
  std::vector<double> real_part() const;

 private:
  Grid grid_;
  std::vector<cplx> amp_;
};

double discrete_norm(std::span<const cplx> v, double h);
double discrete_norm(std::span<const double> v, double h);

}  // namespace flea
