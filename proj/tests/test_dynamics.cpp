#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "flea/dynamics.hpp"
#include "flea/errors.hpp"

using namespace flea;

namespace {

struct Setup {
  ModelParams p = ModelParams::semiclassical(kDynamicsXi);
  Grid grid = dynamics_grid(p);
  TridiagOperator h0 = build_hamiltonian(grid, eval_potential(double_well(p), grid), p);
  EigenSystem es = lowest_eigenpairs(h0, 2);
};

double distance(const WaveFunction& a, const WaveFunction& b) {
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a.amplitudes()[j] - b.amplitudes()[j]);
  return std::sqrt(s * a.grid().spacing());
}

double static_threshold(const Setup& s, const PerturbationSpec& flea) {
  std::vector<double> eps;
  for (int k = 0; k <= 40; ++k) eps.push_back(std::pow(10.0, -1.0 - 0.2 * k));
  const auto sweep = flea_sensitivity_sweep(s.p, flea, eps, s.grid, 4);
  return crossing_epsilon(sweep, 0.75).value();
}

}  // namespace

TEST_CASE("schedules") {
  const auto flea = default_flea(ModelParams::semiclassical(kDynamicsXi), 1.0);
  const RampSchedule q(Quench{2e-3, 1.0}, flea);
  CHECK(q.scale(0.5) == 0.0);
  CHECK(q.scale(1.0) == 2e-3);
  CHECK(q.scale(7.0) == 2e-3);

  const RampSchedule r(SinRamp{4.0}, flea);
  CHECK(r.scale(0.0) == 0.0);
  CHECK(r.scale(2.0) == doctest::Approx(std::sin(std::numbers::pi / 4)).epsilon(1e-15));
  CHECK(r.scale(4.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.scale(9.0) == 1.0);

  const RampSchedule n1(WhiteNoise{1e-3, 0.5, 11}, flea, 100);
  const RampSchedule n2(WhiteNoise{1e-3, 0.5, 11}, flea, 100);
  const RampSchedule n3(WhiteNoise{1e-3, 0.5, 12}, flea, 100);
  bool differs = false;
  for (double t = 0; t < 100; t += 0.37) {
    CHECK(n1.scale(t) == n2.scale(t));
    differs = differs || n1.scale(t) != n3.scale(t);
  }
  CHECK(differs);
  CHECK(n1.scale(0.6) == n1.scale(0.9));

  const RampSchedule k1(PoissonKicks{0.5, 1e-3, 5}, flea, 100);
  const RampSchedule k2(PoissonKicks{0.5, 1e-3, 5}, flea, 100);
  int jumps = 0;
  for (double t = 0.01; t < 100; t += 0.01) {
    CHECK(k1.scale(t) == k2.scale(t));
    if (k1.scale(t) != k1.scale(t - 0.01)) ++jumps;
  }
  CHECK(jumps > 20);
  CHECK(jumps < 100);
}

TEST_CASE("stationary ground state stays symmetric") {
  Setup s;
  const auto flea = default_flea(s.p, 1.0);
  const auto traj = propagate(s.es.states[0], s.h0, RampSchedule::off(flea), kDynamicsDt, 1000.0,
                              {.stride = 25000, .keep_states = false});
  for (const auto& o : traj.observables) CHECK(std::abs(o.left_well_probability - 0.5) < 1e-6);
}

TEST_CASE("quench above and below the static threshold") {
  Setup s;
  const auto flea = default_flea(s.p, 1.0);
  const double eps_star = static_threshold(s, flea);

  const auto above = propagate(s.es.states[0], s.h0, RampSchedule(Quench{3 * eps_star}, flea), kDynamicsDt, 60.0,
                               {.stride = 25, .keep_states = false});
  double peak = 0, late_return = 1;
  for (std::size_t i = 0; i < above.times.size(); ++i) {
    const double d = std::abs(above.observables[i].left_well_probability - 0.5);
    peak = std::max(peak, d);
    if (peak > 0.2) late_return = std::min(late_return, d);
  }
  CHECK(peak > 0.2);
  CHECK(late_return < 0.02);

  const auto below = propagate(s.es.states[0], s.h0, RampSchedule(Quench{eps_star / 100}, flea), kDynamicsDt, 60.0,
                               {.stride = 25, .keep_states = false});
  for (const auto& o : below.observables) CHECK(std::abs(o.left_well_probability - 0.5) < 0.02);
}

TEST_CASE("instantaneous coefficients") {
  Setup s;
  const auto off = RampSchedule::off(default_flea(s.p, 1.0));
  const auto still = propagate(s.es.states[0], s.h0, off, kDynamicsDt, 4.0, {.stride = 500});
  const auto c = instantaneous_coefficients(still, off, 2);
  for (std::size_t t = 0; t < c.times.size(); ++t) {
    CHECK(std::abs(c.c[t][0] - cplx(1.0)) < 1e-8);
    CHECK(c.weight(t, 1) < 1e-12);
  }

  const RampSchedule fast(SinRamp{1.0}, default_flea(s.p, 0.3));
  const auto tr = propagate(s.es.states[0], s.h0, fast, kDynamicsDt, 3.0, {.stride = 50});
  const auto cf = instantaneous_coefficients(tr, fast, 2);
  double mx = 0;
  for (std::size_t t = 0; t < cf.times.size(); ++t) mx = std::max(mx, cf.weight(t, 1));
  CHECK(mx > 0.1);
}

TEST_CASE("adiabatic report") {
  Setup s;
  const auto flea = default_flea(s.p, 0.003);
  const auto r = adiabatic_report(s.p, flea, 4.0, s.grid);
  // Oracle: pi / (2 T delta) |W_10| and the closed-form T_required.
  CHECK(r.c1dot0 == doctest::Approx(std::numbers::pi / (2 * 4.0 * r.delta0) * r.matrix_element).epsilon(1e-12));
  CHECK(r.T_required ==
        doctest::Approx(std::numbers::pi * r.matrix_element * s.p.hbar / (2 * 0.01 * r.delta0 * r.delta0)).epsilon(1e-12));
  const auto r2 = adiabatic_report(s.p, flea, 8.0, s.grid);
  CHECK(r2.c1dot0 == doctest::Approx(r.c1dot0 / 2).epsilon(1e-12));
  const auto r3 = adiabatic_report(s.p, flea.scaled(1e-3), 4.0, s.grid);
  CHECK(r3.matrix_element == doctest::Approx(1e-3 * r.matrix_element).epsilon(1e-12));
  CHECK(r3.gamma == doctest::Approx(1e-3 * r.gamma).epsilon(1e-12));

  const RampSchedule ramp(SinRamp{r.T_required}, flea);
  const auto tr = propagate(s.es.states[0], s.h0, ramp, kDynamicsDt, r.T_required,
                            {.stride = static_cast<std::size_t>(r.T_required / kDynamicsDt)});
  const auto c = instantaneous_coefficients(tr, ramp, 2);
  CHECK(c.weight(c.times.size() - 1, 0) > 0.99);
}

TEST_CASE("gauge term vanishes for a real eigenbasis") {
  Setup s;
  const RampSchedule ramp(SinRamp{4.0}, default_flea(s.p, 0.3));
  CHECK(std::abs(gauge_term(s.h0, ramp, 0, 2.0)) < 1e-8);
  CHECK(std::abs(gauge_term(s.h0, ramp, 1, 2.0)) < 1e-8);
}

TEST_CASE("crank nicolson quality") {
  Setup s;
  const auto flea = default_flea(s.p, 0.3);
  const RampSchedule ramp(SinRamp{4.0}, flea);

  const auto run = propagate(s.es.states[0], s.h0, ramp, kDynamicsDt, 4.0, {.stride = 1000});
  double drift = 0;
  for (const auto& o : run.observables) drift = std::max(drift, std::abs(o.norm - 1.0));
  CHECK(drift < 1e-8);

  const RampSchedule quench(Quench{0.3}, flea);
  const auto q = propagate(s.es.states[0], s.h0, quench, kDynamicsDt, 4.0, {.stride = 1000, .keep_states = false});
  for (const auto& o : q.observables) CHECK(o.energy == doctest::Approx(q.observables[1].energy).epsilon(1e-10));

  const auto back = propagate(run.states.back(), s.h0, ramp, kDynamicsDt, 4.0,
                              {.stride = 10000, .keep_states = true, .backward = true});
  CHECK(distance(back.states.back(), s.es.states[0]) < 1e-6);

  const double t_end = 8.0, dt = kDynamicsDt;
  auto final_state = [&](double step) {
    return propagate(s.es.states[0], s.h0, ramp, step, t_end, {.stride = 1u << 30}).states.back();
  };
  const auto ref = final_state(dt / 8);
  const double e1 = distance(final_state(dt), ref);
  const double e2 = distance(final_state(dt / 2), ref);
  CHECK(e1 / e2 > 3.6);
  CHECK(e1 / e2 < 4.4);

  CHECK_THROWS_AS(propagate(s.es.states[0], s.h0, ramp, 0.05, 1.0), DomainError);
  CHECK_THROWS_AS(propagate(s.es.states[0], s.h0, ramp, -1e-3, 1.0), DomainError);
}

TEST_CASE("quench study") {
  Setup s;
  QuenchStudyConfig cfg{s.p, default_flea(s.p, 1.0), s.grid, kDynamicsDt};
  const double period = 2 * std::numbers::pi * s.p.hbar / (s.es.energies[1] - s.es.energies[0]);
  CHECK_THROWS_AS(quench_localization_study(cfg, {0.0}, 5 * period), DomainError);
  const auto st = quench_localization_study(cfg, {0.0}, 10.5 * period);
  REQUIRE(st.size() == 1);
  CHECK(st[0].time_averaged_p_left == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(st[0].perturbed_period == doctest::Approx(period).epsilon(1e-8));
  CHECK(st[0].max_sustained_window == 0.0);
}

TEST_CASE("gamma shifts by the shrink exponent") {
  const auto grid = gamma_hbar_grid(5);
  REQUIRE(grid.size() == 5);
  CHECK(grid.front() == doctest::Approx(kGammaHbarMax));
  CHECK(grid.back() == doctest::Approx(kGammaHbarMin));
  const ModelParams base;
  const auto flea = collapse_flea(base);
  const auto a = gamma_scan(grid, flea, 12, 4);
  const auto b = gamma_scan(grid, flea.scaled(1e-3), 12, 4);
  REQUIRE(a.points.size() == 5);
  REQUIRE(b.points.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.points[i].log10_gamma - b.points[i].log10_gamma == doctest::Approx(3.0).epsilon(1e-9));
  }
  CHECK(a.slope > 0);
  CHECK(a.r_squared > 0.99);
  for (const auto& g : a.points) CHECK(g.shrunk_max_well_probability < 0.95);
}
