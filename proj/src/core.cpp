#include "flea/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace flea {

Grid::Grid(double x_min, double x_max, std::size_t n_points, Boundary boundary)
    : x_min_(x_min), x_max_(x_max), n_(n_points), boundary_(boundary) {
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    std::ostringstream os;
    os << "grid bounds inverted or not finite: [" << x_min << ", " << x_max << "]";
    throw DomainError(os.str());
  }
  if (n_points < 16) {
    throw DomainError("grid needs at least 16 points, got " + std::to_string(n_points));
  }
  const double len = x_max - x_min;
  h_ = boundary == Boundary::Dirichlet ? len / static_cast<double>(n_points - 1)
                                       : len / static_cast<double>(n_points);
}

std::vector<double> Grid::nodes() const {
  std::vector<double> xs(n_);
  for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
  return xs;
}

bool Grid::mirror_symmetric() const {
  if (boundary_ != Boundary::Dirichlet) return false;
  return std::abs(x_min_ + x_max_) <= 1e-12 * (x_max_ - x_min_);
}

Grid make_grid(double x_min, double x_max, std::size_t n_points, Boundary boundary) {
  return Grid(x_min, x_max, n_points, boundary);
}

double ModelParams::xi() const { return std::sqrt(hbar * hbar / mass); }
double ModelParams::barrier_height() const { return lambda * a * a * a * a / 8.0; }
double ModelParams::spring_constant() const { return lambda * a * a; }
double ModelParams::characteristic_length() const {
  return std::pow(hbar * hbar / (mass * spring_constant()), 0.25);
}

void ModelParams::validate() const {
  if (!(hbar > 0) || !(mass > 0) || !(lambda > 0) || !(a > 0)) {
    throw DomainError("model parameters hbar, mass, lambda, a must be positive");
  }
}

ModelParams ModelParams::semiclassical(double xi, double lambda, double a) {
  ModelParams p{xi, 1.0, lambda, a};
  p.validate();
  return p;
}

PerturbationSpec::PerturbationSpec(ParabolicBump b) : shape_(b) {
  if (!(b.half_width > 0)) throw DomainError("parabolic bump needs half_width > 0");
  lo_ = b.center - b.half_width;
  hi_ = b.center + b.half_width;
}

PerturbationSpec::PerturbationSpec(GaussianBump b) : shape_(b) {
  if (!(b.sigma > 0)) throw DomainError("gaussian bump needs sigma > 0");
  lo_ = b.center - kGaussianCutoff * b.sigma;
  hi_ = b.center + kGaussianCutoff * b.sigma;
}

double PerturbationSpec::operator()(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  if (const auto* p = std::get_if<ParabolicBump>(&shape_)) {
    const double u = (x - p->center) / p->half_width;
    return p->height * std::max(0.0, 1.0 - u * u);
  }
  const auto& g = std::get<GaussianBump>(shape_);
  const double u = (x - g.center) / g.sigma;
  return g.height * std::exp(-0.5 * u * u);
}

double PerturbationSpec::height() const {
  return std::visit([](const auto& s) { return s.height; }, shape_);
}

PerturbationSpec PerturbationSpec::scaled(double factor) const {
  return std::visit(
      [factor](auto s) {
        s.height *= factor;
        return PerturbationSpec(s);
      },
      shape_);
}

namespace {

struct BaseEval {
  double x;
  double operator()(const SymmetricDoubleWell& w) const {
    const double u = x * x - w.a * w.a;
    return w.lambda / 8.0 * u * u;
  }
  double operator()(const PeriodicCosSq& w) const {
    const double c = std::cos(std::numbers::pi * x / (2.0 * w.a));
    return w.barrier * c * c;
  }
  double operator()(const Quadratic& w) const { return 0.5 * w.omega * w.omega * x * x; }
  double operator()(const Custom& w) const {
    const std::size_t n = w.values.size();
    if (n == 0) return 0.0;
    if (n == 1 || x <= w.x_lo) return w.values.front();
    if (x >= w.x_hi) return w.values.back();
    const double s = (x - w.x_lo) / (w.x_hi - w.x_lo) * static_cast<double>(n - 1);
    const auto i = std::min(static_cast<std::size_t>(s), n - 2);
    const double f = s - static_cast<double>(i);
    return (1.0 - f) * w.values[i] + f * w.values[i + 1];
  }
};

}  // namespace

double PotentialSpec::base_value(double x) const { return std::visit(BaseEval{x}, base); }

double PotentialSpec::operator()(double x) const {
  double v = base_value(x);
  for (const auto& p : perturbations) v += p.scale * p.shape(x);
  return v;
}

PotentialSpec PotentialSpec::with(PerturbationSpec w, double scale) const {
  PotentialSpec out = *this;
  out.perturbations.push_back({std::move(w), scale});
  return out;
}

std::vector<double> eval_perturbation(const PerturbationSpec& w, const Grid& grid) {
  if (w.support_lo() < grid.x_min() || w.support_hi() > grid.x_max()) {
    throw DomainError("perturbation support leaves the grid");
  }
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) out[j] = w(grid.x(j));
  return out;
}

std::vector<double> eval_potential(const PotentialSpec& spec, const Grid& grid,
                                   std::optional<std::span<const double>> scales) {
  if (scales && scales->size() != spec.perturbations.size()) {
    throw DomainError("scale override count does not match perturbation count");
  }
  for (const auto& p : spec.perturbations) {
    if (p.shape.support_lo() < grid.x_min() || p.shape.support_hi() > grid.x_max()) {
      std::ostringstream os;
      os << "perturbation support [" << p.shape.support_lo() << ", " << p.shape.support_hi()
         << "] leaves the grid [" << grid.x_min() << ", " << grid.x_max() << "]";
      throw DomainError(os.str());
    }
  }
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) v[j] = spec.base_value(grid.x(j));
  for (std::size_t k = 0; k < spec.perturbations.size(); ++k) {
    const auto& p = spec.perturbations[k];
    const double s = scales ? (*scales)[k] : p.scale;
    if (s == 0.0) continue;
    for (std::size_t j = 0; j < grid.size(); ++j) v[j] += s * p.shape(grid.x(j));
  }
  return v;
}

double TridiagOperator::entry(std::size_t i, std::size_t j) const {
  const std::size_t n = size();
  if (i == j) return diag[i];
  if (i + 1 == j) return off[i];
  if (j + 1 == i) return off[j];
  if ((i == 0 && j == n - 1) || (j == 0 && i == n - 1)) return corner;
  return 0.0;
}

double TridiagOperator::norm_bound() const {
  const std::size_t n = size();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = std::abs(diag[i]);
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < n) r += std::abs(off[i]);
    if (i == 0 || i == n - 1) r += std::abs(corner);
    best = std::max(best, r);
  }
  return best;
}

namespace {

template <class T>
void apply_impl(const TridiagOperator& op, std::span<const T> x, std::span<T> y) {
  const std::size_t n = op.size();
  if (x.size() != n || y.size() != n) throw DomainError("operator/vector size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    T acc = op.diag[i] * x[i];
    if (i > 0) acc += op.off[i - 1] * x[i - 1];
    if (i + 1 < n) acc += op.off[i] * x[i + 1];
    y[i] = acc;
  }
  if (op.corner != 0.0) {
    y[0] += op.corner * x[n - 1];
    y[n - 1] += op.corner * x[0];
  }
}

}  // namespace

void TridiagOperator::apply(std::span<const double> x, std::span<double> y) const {
  apply_impl<double>(*this, x, y);
}

void TridiagOperator::apply(std::span<const cplx> x, std::span<cplx> y) const {
  apply_impl<cplx>(*this, x, y);
}

TridiagOperator TridiagOperator::shifted(std::span<const double> delta, double scale) const {
  if (delta.size() != size()) throw DomainError("potential shift has wrong length");
  TridiagOperator out = *this;
  for (std::size_t j = 0; j < size(); ++j) out.diag[j] += scale * delta[j];
  return out;
}

TridiagOperator build_hamiltonian(const Grid& grid, std::span<const double> potential,
                                  const ModelParams& params) {
  params.validate();
  const std::size_t n = grid.size();
  if (potential.size() != n) {
    throw DomainError("potential length " + std::to_string(potential.size()) +
                      " does not match grid size " + std::to_string(n));
  }
  const double h = grid.spacing();
  const double t = params.hbar * params.hbar / (2.0 * params.mass * h * h);
  TridiagOperator op{grid, std::vector<double>(n), std::vector<double>(n - 1, -t), 0.0, t, params};
  for (std::size_t j = 0; j < n; ++j) op.diag[j] = 2.0 * t + potential[j];
  if (grid.boundary() == Boundary::Periodic) op.corner = -t;
  return op;
}

double discrete_norm(std::span<const cplx> v, double h) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s * h);
}

double discrete_norm(std::span<const double> v, double h) {
  double s = 0.0;
  for (double z : v) s += z * z;
  return std::sqrt(s * h);
}

WaveFunction::WaveFunction(Grid grid, std::vector<cplx> amplitudes, bool normalize)
    : grid_(std::move(grid)), amp_(std::move(amplitudes)) {
  if (amp_.size() != grid_.size()) throw DomainError("amplitude count does not match grid");
  if (normalize) {
    const double nrm = discrete_norm(amp_, grid_.spacing());
    if (!(nrm > 0) || !std::isfinite(nrm)) throw DomainError("cannot normalize a zero state");
    for (auto& z : amp_) z /= nrm;
  }
}

WaveFunction WaveFunction::from_real(Grid grid, std::span<const double> values, bool normalize) {
  std::vector<cplx> amp(values.begin(), values.end());
  return WaveFunction(std::move(grid), std::move(amp), normalize);
}

double WaveFunction::norm() const { return discrete_norm(amp_, grid_.spacing()); }

cplx WaveFunction::inner(const WaveFunction& other) const {
  if (other.size() != size()) throw DomainError("inner product of states on different grids");
  cplx s = 0.0;
  for (std::size_t j = 0; j < size(); ++j) s += std::conj(amp_[j]) * other.amp_[j];
  return s * grid_.spacing();
}

std::vector<double> WaveFunction::real_part() const {
  std::vector<double> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = amp_[j].real();
  return out;
}

}  // namespace flea
