#include "flea/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "flea/parallel.hpp"
#include "flea/tridiag.hpp"

namespace flea {

namespace {

using LD = long double;

tridiag::Matrix<LD> to_matrix(const TridiagOperator& h) {
  tridiag::Matrix<LD> m;
  m.d.assign(h.diag.begin(), h.diag.end());
  m.e.assign(h.off.begin(), h.off.end());
  m.corner = h.corner;
  return m;
}

WaveFunction to_state(const Grid& grid, const std::vector<LD>& v) {
  std::vector<double> vals(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) vals[i] = static_cast<double>(v[i]);
  return WaveFunction::from_real(grid, vals);
}

double full_residual(const TridiagOperator& h, double e, const WaveFunction& psi) {
  const auto re = psi.real_part();
  std::vector<double> y(re.size());
  h.apply(re, y);
  double s = 0.0, n = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double r = y[j] - e * re[j];
    s += r * r;
    n += re[j] * re[j];
  }
  return std::sqrt(s / n) / h.norm_bound();
}

void fix_sign(std::vector<LD>& v) {
  LD vmax = 0;
  for (LD x : v) vmax = std::max(vmax, std::abs(x));
  for (LD x : v) {
    if (std::abs(x) >= LD(0.1) * vmax) {
      if (x < 0) {
        for (auto& y : v) y = -y;
      }
      return;
    }
  }
}

bool parity_applicable(const TridiagOperator& h) {
  const std::size_t n = h.size();
  if (h.periodic() || n % 2 != 0 || !h.grid.mirror_symmetric()) return false;
  return reflection_commutator(h) < 1e-12;
}

struct Sector {
  tridiag::Eigenpairs<LD> pairs;
  bool odd;
};

EigenSystem parity_eigenpairs(const TridiagOperator& h, std::size_t k, double tol) {
  const std::size_t n = h.size();
  const std::size_t half = n / 2;
  const std::size_t r = half;  // first node of the right half

  tridiag::Matrix<LD> base;
  base.d.resize(half);
  base.e.resize(half - 1);
  for (std::size_t i = 0; i < half; ++i) {
    base.d[i] = (LD(h.diag[r + i]) + LD(h.diag[n - 1 - (r + i)])) / 2;
  }
  for (std::size_t i = 0; i + 1 < half; ++i) {
    base.e[i] = (LD(h.off[r + i]) + LD(h.off[n - 2 - (r + i)])) / 2;
  }
  const LD link = h.off[r - 1];  // coupling across the mirror plane
  tridiag::Matrix<LD> even = base, odd = base;
  even.d[0] += link;
  odd.d[0] -= link;

  const std::size_t k_sector = std::min(half, k / 2 + 1);
  const LD ltol = static_cast<LD>(tol);
  Sector se{tridiag::lowest(even, k_sector, ltol), false};
  Sector so{tridiag::lowest(odd, k_sector, ltol), true};

  auto unfold = [&](const std::vector<LD>& v, bool is_odd) {
    std::vector<LD> full(n);
    for (std::size_t i = 0; i < half; ++i) {
      full[r + i] = v[i];
      full[r - 1 - i] = is_odd ? -v[i] : v[i];
    }
    fix_sign(full);
    return full;
  };

  EigenSystem es{{}, {}, h.params, 0.0, std::nullopt, true};
  std::size_t ie = 0, io = 0;
  while (es.energies.size() < k) {
    const bool take_even = io >= k_sector || (ie < k_sector && se.pairs.values[ie] <= so.pairs.values[io]);
    const Sector& s = take_even ? se : so;
    const std::size_t idx = take_even ? ie++ : io++;
    es.energies.push_back(static_cast<double>(s.pairs.values[idx]));
    es.states.push_back(to_state(h.grid, unfold(s.pairs.vectors[idx], s.odd)));
  }

  // Even/odd identity: (E_odd - E_even) <u, v>_half = -2 link u_0 v_0.
  const auto& u = se.pairs.vectors[0];
  const auto& v = so.pairs.vectors[0];
  if (k >= 2 && std::max(se.pairs.values[0], so.pairs.values[0]) <=
                    std::min(k_sector > 1 ? se.pairs.values[1] : LD(INFINITY),
                             k_sector > 1 ? so.pairs.values[1] : LD(INFINITY))) {
    LD dot = 0;
    for (std::size_t i = 0; i < half; ++i) dot += u[i] * v[i];
    const LD delta = -2 * link * u[0] * v[0] / dot;
    es.doublet_splitting = static_cast<double>(std::abs(delta));
  }

  for (std::size_t i = 0; i < es.size(); ++i) {
    es.worst_residual = std::max(es.worst_residual, full_residual(h, es.energies[i], es.states[i]));
  }
  return es;
}

}  // namespace

double reflection_commutator(const TridiagOperator& h) {
  const std::size_t n = h.size();
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(h.diag[j] - h.diag[n - 1 - j]));
  for (std::size_t j = 0; j + 1 < n; ++j) worst = std::max(worst, std::abs(h.off[j] - h.off[n - 2 - j]));
  return worst;
}

EigenSystem lowest_eigenpairs(const TridiagOperator& h, std::size_t k, double tol) {
  if (k == 0 || 4 * k > h.size()) throw DomainError("need 1 <= k << n_points eigenpairs");
  if (parity_applicable(h)) return parity_eigenpairs(h, k, tol);

  const auto pairs = tridiag::lowest(to_matrix(h), k, static_cast<LD>(tol));
  EigenSystem es{{}, {}, h.params, 0.0, std::nullopt, false};
  for (std::size_t i = 0; i < k; ++i) {
    es.energies.push_back(static_cast<double>(pairs.values[i]));
    es.states.push_back(to_state(h.grid, pairs.vectors[i]));
    es.worst_residual = std::max(es.worst_residual, full_residual(h, es.energies[i], es.states[i]));
  }
  return es;
}

double energy_splitting(const EigenSystem& es) {
  if (es.size() < 2) throw DomainError("splitting needs at least two states");
  if (es.doublet_splitting) return *es.doublet_splitting;
  return std::max(0.0, es.energies[1] - es.energies[0]);
}

std::optional<double> resolved_splitting(const EigenSystem& es) {
  const double d = energy_splitting(es);
  if (es.doublet_splitting) {
    return d > 0 ? std::optional<double>(d) : std::nullopt;
  }
  if (d < kSplittingFloor * std::abs(es.energies[0]) || d <= 0) return std::nullopt;
  return d;
}

namespace {

double golden_minimum(const PotentialSpec& v, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = v(c), fd = v(d);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = v(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = v(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double wkb_action(const PotentialSpec& potential, const ModelParams& params, const Grid& grid) {
  params.validate();
  const auto vals = eval_potential(potential, grid);
  const std::size_t n = vals.size();
  std::vector<std::size_t> minima;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (vals[j] < vals[j - 1] && vals[j] <= vals[j + 1]) minima.push_back(j);
  }
  if (minima.size() != 2) {
    throw DomainError("wkb_action needs exactly two potential minima, found " +
                      std::to_string(minima.size()));
  }
  const double h = grid.spacing();
  const double x1 = golden_minimum(potential, grid.x(minima[0] - 1), grid.x(minima[0] + 1));
  const double x2 = golden_minimum(potential, grid.x(minima[1] - 1), grid.x(minima[1] + 1));
  const double vmin = std::min(potential(x1), potential(x2));

  // Composite Simpson at (at most) the operator's grid spacing.
  std::size_t intervals = static_cast<std::size_t>(std::ceil((x2 - x1) / h));
  intervals += intervals % 2;
  intervals = std::max<std::size_t>(intervals, 2);
  const double step = (x2 - x1) / static_cast<double>(intervals);
  auto f = [&](double x) { return std::sqrt(2.0 * params.mass * std::max(0.0, potential(x) - vmin)); };
  double s = f(x1) + f(x2);
  for (std::size_t i = 1; i < intervals; ++i) {
    s += (i % 2 ? 4.0 : 2.0) * f(x1 + static_cast<double>(i) * step);
  }
  return s * step / 3.0;
}

Grid default_grid(const ModelParams& params) {
  return make_grid(-4.0 * params.a, 4.0 * params.a, 2048, Boundary::Dirichlet);
}

double wkb_action(const PotentialSpec& potential, const ModelParams& params) {
  return wkb_action(potential, params, default_grid(params));
}

SplittingFit splitting_scan(const std::vector<ModelParams>& params_list, const PotentialSpec& potential,
                            const Grid& grid, std::size_t workers) {
  const auto v = eval_potential(potential, grid);
  auto results = parallel_map(params_list.size(), workers, [&](std::size_t i) {
    const auto h = build_hamiltonian(grid, v, params_list[i]);
    return resolved_splitting(lowest_eigenpairs(h, 2));
  });

  SplittingFit fit;
  for (std::size_t i = 0; i < params_list.size(); ++i) {
    if (results[i]) {
      fit.points.push_back({params_list[i].hbar, *results[i]});
    } else {
      fit.excluded_hbar.push_back(params_list[i].hbar);
    }
  }
  std::vector<double> distinct;
  for (const auto& p : fit.points) distinct.push_back(p.hbar);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 5) {
    std::ostringstream os;
    os << "splitting_scan needs >= 5 resolved hbar values, got " << distinct.size();
    if (!fit.excluded_hbar.empty()) os << " (" << fit.excluded_hbar.size() << " unresolved)";
    throw ConvergenceError(os.str(), params_list.size(), 0.0);
  }

  const double m = static_cast<double>(fit.points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : fit.points) {
    const double x = 1.0 / p.hbar;
    const double y = std::log(p.splitting / p.hbar);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / m;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / m;
  for (const auto& p : fit.points) {
    const double y = std::log(p.splitting / p.hbar);
    const double yhat = icpt + slope / p.hbar;
    ss_res += (y - yhat) * (y - yhat);
    ss_tot += (y - ybar) * (y - ybar);
  }
  fit.d_fit = -slope;
  fit.prefactor = std::exp(icpt);
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

std::size_t WellPartition::well_of(double x) const {
  if (width > 0) {
    const double k = std::floor((x - origin) / width);
    const auto c = static_cast<long long>(count);
    long long w = static_cast<long long>(k) % c;
    if (w < 0) w += c;
    return static_cast<std::size_t>(w);
  }
  return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
}

WellPartition partition_for(const PotentialSpec& potential, const Grid& grid) {
  WellPartition part;
  if (std::holds_alternative<SymmetricDoubleWell>(potential.base)) {
    part.cuts = {0.0};
    return part;
  }
  if (const auto* pc = std::get_if<PeriodicCosSq>(&potential.base)) {
    part.width = 2.0 * pc->a;
    part.origin = part.width * std::floor(grid.x_min() / part.width);
    part.count = static_cast<std::size_t>(pc->n_wells);
    return part;
  }
  if (std::holds_alternative<Quadratic>(potential.base)) return part;

  // Generic: interior local maxima of the sampled base potential.
  const std::size_t n = grid.size();
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = potential.base_value(grid.x(j));
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (v[j] > v[j - 1] && v[j] >= v[j + 1]) {
      std::size_t k = j;
      while (k + 1 < n && v[k + 1] == v[j]) ++k;
      part.cuts.push_back(0.5 * (grid.x(j) + grid.x(k)));
      j = k;
    }
  }
  return part;
}

std::vector<double> well_probability(const WaveFunction& psi, const WellPartition& partition) {
  std::vector<double> p(partition.wells(), 0.0);
  const Grid& g = psi.grid();
  for (std::size_t j = 0; j < psi.size(); ++j) p[partition.well_of(g.x(j))] += psi.density(j);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= total;
  return p;
}

PotentialSpec double_well(const ModelParams& params) {
  return PotentialSpec{SymmetricDoubleWell{params.lambda, params.a}, {}};
}

PerturbationSpec default_flea(const ModelParams& params, double height) {
  return PerturbationSpec(ParabolicBump{params.a, params.a, height});
}

SensitivityCurve flea_sensitivity_sweep(const ModelParams& params, const PerturbationSpec& flea,
                                        const std::vector<double>& epsilons, const Grid& grid,
                                        std::size_t workers) {
  for (double e : epsilons) {
    if (!(e >= 0)) throw DomainError("flea scales must be non-negative");
  }
  const auto base = double_well(params);
  const auto v0 = eval_potential(base, grid);
  const auto w = eval_perturbation(flea, grid);
  const auto part = partition_for(base, grid);
  if (part.well_of(flea.support_lo()) != part.well_of(std::nextafter(flea.support_hi(), flea.support_lo()))) {
    throw DomainError("the flea must sit inside a single well");
  }
  const auto h0 = build_hamiltonian(grid, v0, params);

  SensitivityCurve curve;
  curve.xi = params.xi();
  curve.epsilon = epsilons;
  curve.left_well_probability = parallel_map(epsilons.size(), workers, [&](std::size_t i) {
    try {
      const auto es = lowest_eigenpairs(h0.shifted(w, epsilons[i]), 2);
      return well_probability(es.states[0], part)[0];
    } catch (const ConvergenceError& e) {
      std::ostringstream os;
      os << e.what() << " (epsilon = " << epsilons[i] << ")";
      throw ConvergenceError(os.str(), e.iterations(), e.worst_residual());
    }
  });
  return curve;
}

SensitivityCurve flea_sensitivity_sweep(const ModelParams& params, const PerturbationSpec& flea,
                                        const std::vector<double>& epsilons) {
  return flea_sensitivity_sweep(params, flea, epsilons, default_grid(params));
}

std::optional<double> crossing_epsilon(const SensitivityCurve& curve, double level) {
  std::vector<std::size_t> order(curve.epsilon.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return curve.epsilon[a] > curve.epsilon[b]; });
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const std::size_t i = order[k], j = order[k + 1];
    const double pi = curve.left_well_probability[i], pj = curve.left_well_probability[j];
    if ((pi - level) * (pj - level) <= 0 && pi != pj && curve.epsilon[j] > 0) {
      const double li = std::log10(curve.epsilon[i]), lj = std::log10(curve.epsilon[j]);
      const double f = (level - pi) / (pj - pi);
      return std::pow(10.0, li + f * (lj - li));
    }
  }
  return std::nullopt;
}

NWellSystem nwell_spectrum(const ModelParams& params, int n_wells, const std::vector<PerturbationSpec>& fleas,
                           std::size_t points_per_well) {
  params.validate();
  if (n_wells < 2) throw DomainError("nwell_spectrum needs at least two wells");
  const double half = n_wells * params.a;
  Grid grid = make_grid(-half, half, points_per_well * static_cast<std::size_t>(n_wells), Boundary::Periodic);
  PotentialSpec pot{PeriodicCosSq{params.barrier_height(), params.a, n_wells}, {}};
  auto part = partition_for(pot, grid);
  for (const auto& f : fleas) {
    if (part.well_of(f.support_lo()) != part.well_of(std::nextafter(f.support_hi(), f.support_lo()))) {
      throw DomainError("each flea must sit inside a single well");
    }
    pot = pot.with(f);
  }
  const auto v = eval_potential(pot, grid);
  auto es = lowest_eigenpairs(build_hamiltonian(grid, v, params), 4);
  return NWellSystem{std::move(pot), std::move(grid), std::move(part), std::move(es)};
}

double matrix_element(const WaveFunction& bra, std::span<const double> w, const WaveFunction& ket) {
  if (w.size() != bra.size() || ket.size() != bra.size()) throw DomainError("matrix element size mismatch");
  cplx s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += std::conj(bra[j]) * w[j] * ket[j];
  return (s * bra.grid().spacing()).real();
}

DoubletGround doublet_ground_state(const EigenSystem& symmetric, const std::vector<double>& flea, double eps) {
  if (symmetric.size() < 2) throw DomainError("doublet reduction needs two states");
  const auto& g0 = symmetric.states[0];
  const auto& g1 = symmetric.states[1];
  const double delta = energy_splitting(symmetric);
  const double w00 = matrix_element(g0, flea, g0);
  const double w01 = matrix_element(g0, flea, g1);
  const double w11 = matrix_element(g1, flea, g1);
  const double a = eps * w00, b = eps * w01, c = delta + eps * w11;
  const double theta = 0.5 * std::atan2(-2.0 * b, c - a);

  const Grid& grid = g0.grid();
  double p00 = 0, p11 = 0, p01 = 0, n00 = 0, n11 = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double u = g0[j].real(), v = g1[j].real();
    n00 += u * u;
    n11 += v * v;
    if (grid.x(j) < 0) {
      p00 += u * u;
      p11 += v * v;
      p01 += u * v;
    }
  }
  p00 /= n00;
  p11 /= n11;
  p01 /= std::sqrt(n00 * n11);
  const double cs = std::cos(theta), sn = std::sin(theta);
  DoubletGround out;
  out.mixing_angle = theta;
  out.p_left = cs * cs * p00 + sn * sn * p11 + 2.0 * cs * sn * p01;
  out.max_well_probability = std::max(out.p_left, 1.0 - out.p_left);
  return out;
}

}  // namespace flea
