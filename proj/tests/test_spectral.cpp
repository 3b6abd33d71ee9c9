#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "flea/errors.hpp"
#include "flea/spectral.hpp"

using namespace flea;

namespace {

EigenSystem solve(const PotentialSpec& pot, const ModelParams& p, const Grid& g, std::size_t k) {
  return lowest_eigenpairs(build_hamiltonian(g, eval_potential(pot, g), p), k);
}

double p_left(const PotentialSpec& pot, const ModelParams& p, const Grid& g) {
  return well_probability(solve(pot, p, g, 2).states[0], partition_for(pot, g))[0];
}

}  // namespace

TEST_CASE("harmonic oscillator spectrum") {
  ModelParams p;
  p.hbar = 1.0;
  const Grid g = make_grid(-10, 10, 4001, Boundary::Dirichlet);
  const auto es = solve(PotentialSpec{Quadratic{1.0}, {}}, p, g, 4);
  for (std::size_t n = 0; n < 4; ++n) CHECK(es.energies[n] == doctest::Approx(n + 0.5).epsilon(1e-4));
  CHECK(energy_splitting(es) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("double well parity and doublet ladder") {
  const auto p = ModelParams::semiclassical(0.1);
  const Grid g = default_grid(p);
  const auto es = solve(double_well(p), p, g, 4);
  CHECK(es.parity_resolved);
  const std::size_t n = g.size();
  double worst = 0;
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(es.states[s].density(j) - es.states[s].density(n - 1 - j)));
  }
  CHECK(worst < 1e-8);
  const double d01 = energy_splitting(es);
  CHECK(d01 > 0);
  CHECK(es.energies[3] - es.energies[2] > d01);
}

TEST_CASE("states are orthonormal and deterministic") {
  const auto p = ModelParams::semiclassical(0.2);
  const Grid g = default_grid(p);
  const auto a = solve(double_well(p), p, g, 4);
  const auto b = solve(double_well(p), p, g, 4);
  double worst = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      worst = std::max(worst, std::abs(a.states[i].inner(a.states[j]) - (i == j ? 1.0 : 0.0)));
    }
    const auto x = a.states[i].real_part(), y = b.states[i].real_part();
    CHECK(x == y);
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("parity splitting agrees with the eigenvalue difference where resolvable") {
  const auto p = ModelParams::semiclassical(0.3);
  const Grid g = default_grid(p);
  const auto es = solve(double_well(p), p, g, 2);
  REQUIRE(es.doublet_splitting);
  CHECK(*es.doublet_splitting == doctest::Approx(es.energies[1] - es.energies[0]).epsilon(1e-8));
}

TEST_CASE("splitting shrinks with hbar") {
  const auto p6 = ModelParams::semiclassical(0.6), p3 = ModelParams::semiclassical(0.3);
  const double d6 = energy_splitting(solve(double_well(p6), p6, default_grid(p6), 2));
  const double d3 = energy_splitting(solve(double_well(p3), p3, default_grid(p3), 2));
  CHECK(d3 < d6);
}

TEST_CASE("duplicate lowest energies give zero splitting") {
  const Grid g = make_grid(-1, 1, 32, Boundary::Periodic);
  const auto psi = WaveFunction::from_real(g, std::vector<double>(32, 1.0));
  EigenSystem es;
  es.energies = {0.25, 0.25};
  es.states = {psi, psi};
  CHECK(energy_splitting(es) == 0.0);
  CHECK_FALSE(resolved_splitting(es));
  es.energies.pop_back();
  es.states.pop_back();
  CHECK_THROWS_AS(energy_splitting(es), DomainError);
}

TEST_CASE("wkb action closed form and cubic scaling") {
  ModelParams p;
  CHECK(wkb_action(double_well(p), p) == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  ModelParams q;
  q.a = 2.0;
  CHECK(wkb_action(double_well(q), q) == doctest::Approx(16.0 / 3.0).epsilon(1e-6));
  CHECK_THROWS_AS(wkb_action(PotentialSpec{Quadratic{1.0}, {}}, p), DomainError);
}

TEST_CASE("splitting scan fit") {
  std::vector<ModelParams> list;
  for (double h : {0.30, 0.25, 0.20, 0.15, 0.12}) list.push_back(ModelParams::semiclassical(h));
  const ModelParams base;
  const auto fit = splitting_scan(list, double_well(base), default_grid(base), 2);
  REQUIRE(fit.points.size() == 5);
  // Least-squares oracle on the returned points.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& pt : fit.points) {
    const double x = 1 / pt.hbar, y = std::log(pt.splitting / pt.hbar);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double n = 5;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(fit.d_fit == doctest::Approx(-slope).epsilon(1e-10));
  CHECK(fit.r_squared > 0.99);
  for (std::size_t i = 1; i < fit.points.size(); ++i) CHECK(fit.points[i].splitting < fit.points[i - 1].splitting);

  std::vector<ModelParams> two{ModelParams::semiclassical(0.3), ModelParams::semiclassical(0.2)};
  CHECK_THROWS_AS(splitting_scan(two, double_well(base), default_grid(base)), ConvergenceError);
}

TEST_CASE("well probabilities") {
  const auto p = ModelParams::semiclassical(0.1);
  const Grid g = default_grid(p);
  const auto sym = well_probability(solve(double_well(p), p, g, 2).states[0], partition_for(double_well(p), g));
  CHECK(sym[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(sym[0] + sym[1] == doctest::Approx(1.0).epsilon(1e-14));

  const Grid ring = make_grid(-4, 4, 400, Boundary::Periodic);
  const PotentialSpec cs{PeriodicCosSq{0.125, 1, 4}, {}};
  const auto uni = well_probability(WaveFunction::from_real(ring, std::vector<double>(400, 1.0)), partition_for(cs, ring));
  REQUIRE(uni.size() == 4);
  for (double w : uni) CHECK(w == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("narrow flea localization against the two-level reduction") {
  // A bump of sup-norm 1e-3 on the right well only reaches p_left ~ 0.85 at
  // xi = 0.1; 1e-2 localizes beyond 0.99. Both match the doublet reduction.
  const auto p = ModelParams::semiclassical(0.1);
  const Grid g = default_grid(p);
  const auto sym = solve(double_well(p), p, g, 2);
  const PerturbationSpec shape(ParabolicBump{1.0, 0.5, 1.0});
  const auto w = eval_perturbation(shape, g);
  for (double sup : {1e-3, 1e-2}) {
    const double full = p_left(double_well(p).with(shape, sup), p, g);
    CHECK(full == doctest::Approx(doublet_ground_state(sym, w, sup).p_left).epsilon(1e-3));
  }
  CHECK(p_left(double_well(p).with(shape, 1e-3), p, g) > 0.8);
  CHECK(p_left(double_well(p).with(shape, 1e-2), p, g) > 0.99);
}

TEST_CASE("sensitivity sweep shape") {
  const auto p2 = ModelParams::semiclassical(0.2);
  std::vector<double> eps;
  for (int k = -1; k >= -12; --k) eps.push_back(std::pow(10.0, k));
  const auto c2 = flea_sensitivity_sweep(p2, default_flea(p2), eps, default_grid(p2), 4);
  CHECK(c2.left_well_probability.front() > 0.99);
  CHECK(c2.left_well_probability.back() < 0.51);
  for (std::size_t i = 1; i < eps.size(); ++i) {
    CHECK(c2.left_well_probability[i] <= c2.left_well_probability[i - 1] + 1e-3);
  }
  const auto p1 = ModelParams::semiclassical(0.1);
  const auto c1 = flea_sensitivity_sweep(p1, default_flea(p1), eps, default_grid(p1), 4);
  const auto x1 = crossing_epsilon(c1, 0.75), x2 = crossing_epsilon(c2, 0.75);
  REQUIRE(x1);
  REQUIRE(x2);
  CHECK(*x1 < *x2);

  const auto zero = flea_sensitivity_sweep(p2, default_flea(p2), {0.0}, default_grid(p2));
  CHECK(zero.left_well_probability[0] == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("sweep rejects fleas straddling the barrier") {
  const auto p = ModelParams::semiclassical(0.2);
  const PerturbationSpec straddle(ParabolicBump{0.0, 0.5, 1.0});
  CHECK_THROWS_AS(flea_sensitivity_sweep(p, straddle, {1e-3}), DomainError);
  CHECK_THROWS_AS(flea_sensitivity_sweep(p, default_flea(p), {-1.0}), DomainError);
}

TEST_CASE("zero-scale perturbation reproduces the unperturbed spectrum") {
  const auto p = ModelParams::semiclassical(0.2);
  const Grid g = default_grid(p);
  const auto a = solve(double_well(p), p, g, 4);
  const auto b = solve(double_well(p).with(default_flea(p), 0.0), p, g, 4);
  CHECK(a.energies == b.energies);
}

TEST_CASE("four-well spectrum") {
  const auto p = ModelParams::semiclassical(0.2);
  const auto free = nwell_spectrum(p, 4, {});
  const auto w0 = well_probability(free.system.states[0], free.partition);
  for (double w : w0) CHECK(w == doctest::Approx(0.25).epsilon(1e-6));

  // Wells are [-4,-2), [-2,0), [0,2), [2,4); index 1 is centered at x = -1.
  const auto one = nwell_spectrum(p, 4, {PerturbationSpec(ParabolicBump{-1, 0.5, 1e-2})});
  const auto w1 = well_probability(one.system.states[0], one.partition);
  CHECK(std::min_element(w1.begin(), w1.end()) - w1.begin() == 1);
  CHECK(*std::max_element(w1.begin(), w1.end()) < 0.95);

  const auto three = nwell_spectrum(p, 4,
                                    {PerturbationSpec(ParabolicBump{-1, 0.9, 0.10}),
                                     PerturbationSpec(ParabolicBump{1, 0.9, 0.23}),
                                     PerturbationSpec(ParabolicBump{3, 0.9, 0.37})});
  const auto w3 = well_probability(three.system.states[0], three.partition);
  CHECK(*std::max_element(w3.begin(), w3.end()) > 0.95);

  CHECK_THROWS_AS(nwell_spectrum(p, 1, {}), DomainError);
  CHECK_THROWS_AS(nwell_spectrum(p, 4, {PerturbationSpec(ParabolicBump{0, 0.5, 1e-2})}), DomainError);
}

TEST_CASE("doublet reduction agrees with the full eigensolve for small fleas") {
  const auto p = ModelParams::semiclassical(0.2);
  const Grid g = default_grid(p);
  const auto sym = solve(double_well(p), p, g, 2);
  const auto w = eval_perturbation(default_flea(p), g);
  for (double eps : {1e-6, 1e-5, 1e-4}) {
    const double full = p_left(double_well(p).with(default_flea(p), eps), p, g);
    CHECK(doublet_ground_state(sym, w, eps).p_left == doctest::Approx(full).epsilon(1e-3));
  }
}
