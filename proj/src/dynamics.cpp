#include "flea/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "flea/parallel.hpp"

namespace flea {

namespace {

using cvec = std::vector<cplx>;

// Solves (1 + i tau H) x = (1 - i tau H) psi for one fixed operator.
class CrankNicolson {
 public:
  CrankNicolson(const TridiagOperator& h, double tau) : h_(&h), tau_(tau) {
    const std::size_t n = h.size();
    const cplx it(0.0, tau);
    diag_.resize(n);
    sub_.resize(n);
    for (std::size_t j = 0; j < n; ++j) diag_[j] = 1.0 + it * h.diag[j];
    off_.resize(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) off_[j] = it * h.off[j];
    corner_ = it * h.corner;
    if (corner_ != 0.0) {
      // Sherman-Morrison: T' = A - u v^T with u = (g, 0.., c), v = (1, 0.., c / g).
      gamma_ = -diag_[0];
      diag_[0] -= gamma_;
      diag_[n - 1] -= corner_ * corner_ / gamma_;
    }
    factor();
    if (corner_ != 0.0) {
      z_.assign(n, 0.0);
      z_[0] = gamma_;
      z_[n - 1] = corner_;
      solve_in_place(z_);
      vz_ = z_[0] + corner_ / gamma_ * z_[n - 1];
    }
  }

  void step(cvec& psi, cvec& rhs) const {
    const std::size_t n = psi.size();
    h_->apply(std::span<const cplx>(psi), std::span<cplx>(rhs));
    const cplx it(0.0, tau_);
    for (std::size_t j = 0; j < n; ++j) rhs[j] = psi[j] - it * rhs[j];
    solve_in_place(rhs);
    if (corner_ != 0.0) {
      const cplx vy = rhs[0] + corner_ / gamma_ * rhs[n - 1];
      const cplx f = vy / (1.0 + vz_);
      for (std::size_t j = 0; j < n; ++j) rhs[j] -= f * z_[j];
    }
    psi.swap(rhs);
  }

 private:
  void factor() {
    const std::size_t n = diag_.size();
    sub_[0] = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      sub_[j] = off_[j - 1] / diag_[j - 1];
      diag_[j] -= sub_[j] * off_[j - 1];
    }
  }

  void solve_in_place(cvec& r) const {
    const std::size_t n = r.size();
    for (std::size_t j = 1; j < n; ++j) r[j] -= sub_[j] * r[j - 1];
    r[n - 1] /= diag_[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) r[j] = (r[j] - off_[j] * r[j + 1]) / diag_[j];
  }

  const TridiagOperator* h_;
  double tau_;
  cvec diag_, sub_, off_;
  cplx corner_ = 0.0;
  cplx gamma_ = 0.0;
  cvec z_;
  cplx vz_ = 0.0;
};

double expectation(const TridiagOperator& h0, std::span<const double> w, double s, const cvec& psi, cvec& tmp) {
  h0.apply(std::span<const cplx>(psi), std::span<cplx>(tmp));
  double e = 0.0, nn = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    e += (std::conj(psi[j]) * tmp[j]).real() + s * w[j] * std::norm(psi[j]);
    nn += std::norm(psi[j]);
  }
  return e / nn;
}

}  // namespace

RampSchedule::RampSchedule(Kind kind, PerturbationSpec flea, double horizon)
    : kind_(std::move(kind)), flea_(std::move(flea)) {
  if (const auto* q = std::get_if<SinRamp>(&kind_)) {
    if (!(q->T > 0)) throw DomainError("SinRamp needs T > 0");
  } else if (const auto* wn = std::get_if<WhiteNoise>(&kind_)) {
    if (!(wn->dt_noise > 0)) throw DomainError("WhiteNoise needs dt_noise > 0");
    std::mt19937_64 rng(wn->seed);
    std::normal_distribution<double> gauss;
    const auto count = static_cast<std::size_t>(std::ceil(horizon / wn->dt_noise)) + 1;
    double v = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      v += wn->amplitude * std::sqrt(wn->dt_noise) * gauss(rng);
      jump_times_.push_back(static_cast<double>(k) * wn->dt_noise);
      jump_values_.push_back(v);
    }
  } else if (const auto* pk = std::get_if<PoissonKicks>(&kind_)) {
    if (!(pk->rate > 0)) throw DomainError("PoissonKicks needs rate > 0");
    std::mt19937_64 rng(pk->seed);
    std::exponential_distribution<double> wait(pk->rate);
    std::normal_distribution<double> gauss;
    double t = 0.0, v = 0.0;
    while (true) {
      t += wait(rng);
      if (t > horizon) break;
      v += pk->kick_scale * gauss(rng);
      jump_times_.push_back(t);
      jump_values_.push_back(v);
    }
  }
}

double RampSchedule::scale(double t) const {
  if (const auto* q = std::get_if<Quench>(&kind_)) return t < q->t_on ? 0.0 : q->epsilon;
  if (const auto* r = std::get_if<SinRamp>(&kind_)) {
    if (t <= 0) return 0.0;
    return t <= r->T ? std::sin(std::numbers::pi * t / (2.0 * r->T)) : 1.0;
  }
  const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  if (it == jump_times_.begin()) return 0.0;
  return jump_values_[static_cast<std::size_t>(it - jump_times_.begin()) - 1];
}

double RampSchedule::max_abs_scale(double t_end) const {
  if (const auto* q = std::get_if<Quench>(&kind_)) return std::abs(q->epsilon);
  if (std::holds_alternative<SinRamp>(kind_)) return 1.0;
  double m = 0.0;
  for (std::size_t k = 0; k < jump_times_.size() && jump_times_[k] <= t_end; ++k) {
    m = std::max(m, std::abs(jump_values_[k]));
  }
  return m;
}

Trajectory propagate(const WaveFunction& psi0, const TridiagOperator& base, const RampSchedule& schedule,
                     double dt, double t_end, const PropagateOptions& options) {
  if (!(dt > 0) || !(t_end > 0)) throw DomainError("propagate needs dt > 0 and t_end > 0");
  if (psi0.size() != base.size()) throw DomainError("initial state and operator live on different grids");
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const auto w = eval_perturbation(schedule.flea(), base.grid);
  double wmax = 0.0;
  for (double x : w) wmax = std::max(wmax, std::abs(x));
  const double emax = base.norm_bound() + schedule.max_abs_scale(steps * dt) * wmax;
  if (dt * emax >= 0.1) {
    std::ostringstream os;
    os << "time step too coarse: dt * max|E| = " << dt * emax << " (needs < 0.1)";
    throw DomainError(os.str());
  }
  const WellPartition part = options.partition.value_or(WellPartition{{0.0}});
  const double hbar = base.params.hbar;
  const double sign = options.backward ? -1.0 : 1.0;
  const double tau = sign * dt / (2.0 * hbar);
  const std::size_t stride = std::max<std::size_t>(options.stride, 1);
  const Grid& grid = base.grid;

  Trajectory traj{{}, {}, {}, base, w, dt};
  cvec psi(psi0.amplitudes().begin(), psi0.amplitudes().end());
  cvec tmp(psi.size());
  const double norm0 = 1.0;

  auto record = [&](std::size_t k) {
    const double t = options.backward ? (steps - k) * dt : k * dt;
    const double s = schedule.scale(t);
    double pl = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) {
      if (part.well_of(grid.x(j)) == 0) pl += std::norm(psi[j]);
    }
    const double nrm = discrete_norm(psi, grid.spacing());
    const double drift = std::abs(nrm - norm0);
    if (drift > kNormDriftLimit) {
      std::ostringstream os;
      os << "norm drift " << drift << " at t = " << t;
      throw StabilityError(os.str(), t, drift);
    }
    traj.times.push_back(t);
    traj.observables.push_back({nrm, expectation(base, w, s, psi, tmp), pl * grid.spacing() / (nrm * nrm)});
    if (options.keep_states) traj.states.emplace_back(grid, psi, false);
  };

  record(0);
  std::optional<double> cached_scale;
  std::optional<TridiagOperator> h;
  std::optional<CrankNicolson> cn;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = options.backward ? (steps - k) * dt : k * dt;
    const double s = schedule.scale(t + sign * 0.5 * dt);
    if (!cached_scale || *cached_scale != s) {
      cn.reset();
      h = base.shifted(w, s);
      cn.emplace(*h, tau);
      cached_scale = s;
    }
    cn->step(psi, tmp);
    if ((k + 1) % stride == 0 || k + 1 == steps) record(k + 1);
  }
  return traj;
}

Grid dynamics_grid(const ModelParams& params) {
  return make_grid(-3.0 * params.a, 3.0 * params.a, 240, Boundary::Dirichlet);
}

std::vector<QuenchStats> quench_localization_study(const QuenchStudyConfig& config,
                                                   const std::vector<double>& epsilons, double horizon,
                                                   std::size_t workers) {
  const auto pot = double_well(config.params);
  const auto h0 = build_hamiltonian(config.grid, eval_potential(pot, config.grid), config.params);
  const auto w = eval_perturbation(config.flea, config.grid);
  const auto ground = lowest_eigenpairs(h0, 2).states[0];
  const double hbar = config.params.hbar;

  return parallel_map(epsilons.size(), workers, [&](std::size_t i) {
    const double eps = epsilons[i];
    QuenchStats st;
    st.epsilon = eps;
    const double gap = energy_splitting(lowest_eigenpairs(h0.shifted(w, eps), 2));
    st.perturbed_period = 2.0 * std::numbers::pi * hbar / gap;
    if (horizon < 10.0 * st.perturbed_period) {
      std::ostringstream os;
      os << "horizon " << horizon << " is shorter than 10 perturbed periods (" << 10.0 * st.perturbed_period
         << ") at epsilon = " << eps;
      throw DomainError(os.str());
    }
    PropagateOptions opt;
    opt.stride = config.sample_stride;
    opt.keep_states = false;
    const auto traj = propagate(ground, h0, RampSchedule(Quench{eps, 0.0}, config.flea), config.dt, horizon, opt);

    const auto& ts = traj.times;
    double integral = 0.0, run_start = -1.0, best = 0.0;
    st.min_p_left = st.max_p_left = traj.observables[0].left_well_probability;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double p = traj.observables[k].left_well_probability;
      st.min_p_left = std::min(st.min_p_left, p);
      st.max_p_left = std::max(st.max_p_left, p);
      if (k > 0) {
        integral += 0.5 * (p + traj.observables[k - 1].left_well_probability) * (ts[k] - ts[k - 1]);
      }
      if (p > config.window_level) {
        if (run_start < 0) run_start = ts[k];
        best = std::max(best, ts[k] - run_start);
      } else {
        run_start = -1.0;
      }
    }
    const double span = ts.back() - ts.front();
    st.time_averaged_p_left = integral / span;
    st.max_sustained_window = best;
    st.window_fraction = best / span;
    return st;
  });
}

namespace {

struct BasisCache {
  const TridiagOperator& base;
  std::span<const double> w;
  std::size_t k;
  std::map<double, EigenSystem> cache;

  const EigenSystem& at(double s) {
    auto it = cache.find(s);
    if (it == cache.end()) it = cache.emplace(s, lowest_eigenpairs(base.shifted(w, s), k)).first;
    return it->second;
  }
};

}  // namespace

CoefficientSeries instantaneous_coefficients(const Trajectory& traj, const RampSchedule& schedule, std::size_t k) {
  if (traj.states.size() != traj.times.size()) {
    throw DomainError("instantaneous_coefficients needs a trajectory with stored states");
  }
  const double hbar = traj.base.params.hbar;
  BasisCache basis{traj.base, traj.flea_values, std::max<std::size_t>(k, 2), {}};
  CoefficientSeries out;
  std::vector<double> phase(k, 0.0), signs(k, 1.0);
  const EigenSystem* prev = nullptr;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const EigenSystem& es = basis.at(schedule.scale(t));
    std::vector<double> e(es.energies.begin(), es.energies.begin() + static_cast<std::ptrdiff_t>(k));
    if (prev) {
      for (std::size_t n = 0; n < k; ++n) {
        if (prev != &es && es.states[n].inner(prev->states[n]).real() < 0) signs[n] = -signs[n];
        phase[n] += 0.5 * (out.energies.back()[n] + e[n]) * (t - out.times.back());
      }
    }
    std::vector<cplx> c(k);
    for (std::size_t n = 0; n < k; ++n) {
      c[n] = signs[n] * es.states[n].inner(traj.states[i]) * std::polar(1.0, phase[n] / hbar);
    }
    out.times.push_back(t);
    out.c.push_back(std::move(c));
    out.energies.push_back(std::move(e));
    prev = &es;
  }
  return out;
}

double gauge_term(const TridiagOperator& base, const RampSchedule& schedule, std::size_t n, double t, double h) {
  const auto w = eval_perturbation(schedule.flea(), base.grid);
  const std::size_t k = std::max<std::size_t>(n + 1, 2);
  const auto em = lowest_eigenpairs(base.shifted(w, schedule.scale(t - h)), k);
  const auto e0 = lowest_eigenpairs(base.shifted(w, schedule.scale(t)), k);
  const auto ep = lowest_eigenpairs(base.shifted(w, schedule.scale(t + h)), k);
  const auto& mid = e0.states[n];
  const double sm = em.states[n].inner(mid).real() < 0 ? -1.0 : 1.0;
  const double sp = ep.states[n].inner(mid).real() < 0 ? -1.0 : 1.0;
  const cplx d = sp * mid.inner(ep.states[n]) - sm * mid.inner(em.states[n]);
  return std::abs(d) / (2.0 * h);
}

AdiabaticReport adiabatic_report(const ModelParams& params, const PerturbationSpec& flea, double T,
                                 const Grid& grid) {
  if (!(T > 0)) throw DomainError("adiabatic_report needs T > 0");
  const auto h0 = build_hamiltonian(grid, eval_potential(double_well(params), grid), params);
  const auto es = lowest_eigenpairs(h0, 2);
  const auto delta = resolved_splitting(es);
  if (!delta) throw ConvergenceError("unperturbed doublet unresolved", 0, es.worst_residual);
  const auto w = eval_perturbation(flea, grid);
  AdiabaticReport r;
  r.delta0 = *delta;
  r.matrix_element = std::abs(matrix_element(es.states[1], w, es.states[0]));
  r.T = T;
  r.c1dot0 = std::numbers::pi / (2.0 * T * r.delta0) * r.matrix_element;
  r.gamma = r.matrix_element / r.delta0;
  r.T_required = std::numbers::pi * r.matrix_element * params.hbar / (2.0 * r.criterion * r.delta0 * r.delta0);
  return r;
}

AdiabaticReport adiabatic_report(const ModelParams& params, const PerturbationSpec& flea, double T) {
  return adiabatic_report(params, flea, T, default_grid(params));
}

PerturbationSpec collapse_flea(const ModelParams& params) { return default_flea(params, kCollapseFleaHeight); }

std::vector<double> gamma_hbar_grid(std::size_t count) {
  if (count < 2) throw DomainError("gamma grid needs at least two points");
  // Uniform in 1 / hbar between the range ends.
  std::vector<double> out(count);
  const double lo = 1.0 / kGammaHbarMax, hi = 1.0 / kGammaHbarMin;
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = 1.0 / (lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return out;
}

GammaScan gamma_scan(const std::vector<double>& hbar_values, const PerturbationSpec& flea, int shrink_exponent,
                     std::size_t workers, const ModelParams& shape) {
  struct Row {
    std::optional<GammaPoint> point;
  };
  const double shrink = std::pow(10.0, -shrink_exponent);
  auto rows = parallel_map(hbar_values.size(), workers, [&](std::size_t i) {
    ModelParams p = shape;
    p.hbar = hbar_values[i];
    p.validate();
    const Grid grid = default_grid(p);
    const auto h0 = build_hamiltonian(grid, eval_potential(double_well(p), grid), p);
    const auto es = lowest_eigenpairs(h0, 2);
    const auto delta = resolved_splitting(es);
    if (!delta) return Row{};
    const auto w = eval_perturbation(flea, grid);
    GammaPoint g;
    g.hbar = p.hbar;
    g.delta = *delta;
    g.matrix_element = std::abs(matrix_element(es.states[1], w, es.states[0]));
    g.gamma = g.matrix_element / g.delta;
    g.log10_gamma = std::log10(g.gamma);
    g.shrunk_max_well_probability = doublet_ground_state(es, w, shrink).max_well_probability;
    return Row{g};
  });

  GammaScan scan;
  scan.shrink_exponent = shrink_exponent;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].point) {
      scan.points.push_back(*rows[i].point);
    } else {
      scan.excluded_hbar.push_back(hbar_values[i]);
    }
  }
  if (scan.points.size() >= 2) {
    const double m = static_cast<double>(scan.points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& g : scan.points) {
      sx += 1.0 / g.hbar;
      sy += g.log10_gamma;
      sxx += 1.0 / (g.hbar * g.hbar);
      sxy += g.log10_gamma / g.hbar;
    }
    scan.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    scan.intercept = (sy - scan.slope * sx) / m;
    double ss_res = 0, ss_tot = 0;
    for (const auto& g : scan.points) {
      const double r = g.log10_gamma - (scan.intercept + scan.slope / g.hbar);
      ss_res += r * r;
      ss_tot += (g.log10_gamma - sy / m) * (g.log10_gamma - sy / m);
    }
    scan.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  }
  return scan;
}

}  // namespace flea
