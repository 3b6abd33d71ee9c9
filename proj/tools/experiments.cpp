#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "flea/bohrification.hpp"
#include "flea/dynamics.hpp"
#include "flea/errors.hpp"
#include "flea/parallel.hpp"
#include "flea/spectral.hpp"
#include "flea/spinchain.hpp"
#include "flea/toy.hpp"
#include "output.hpp"
#include "runner.hpp"

namespace flea::cli {

namespace fs = std::filesystem;

namespace {

using Files = std::vector<std::string>;

std::size_t count(const ParamMap& p, const std::string& key, long long min_value = 1) {
  const long long v = p.integer(key);
  if (v < min_value) throw ConfigError("key '" + key + "' must be at least " + std::to_string(min_value));
  return static_cast<std::size_t>(v);
}

std::uint64_t instance_seed(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + i + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Grid well_grid(const ModelParams& params, std::size_t points) {
  return make_grid(-4.0 * params.a, 4.0 * params.a, points, Boundary::Dirichlet);
}

WaveFunction ground_state(const PotentialSpec& pot, const ModelParams& params, const Grid& grid) {
  return lowest_eigenpairs(build_hamiltonian(grid, eval_potential(pot, grid), params), 2).states[0];
}

// --- eigensolve -------------------------------------------------------------

Files eigensolve(const ExperimentConfig& c, const fs::path& dir) {
  const auto& p = c.params;
  const std::string potential = p.choice("potential");
  const std::string flea_mode = p.choice("flea");
  const auto xis = p.list("xi");
  const std::size_t k = count(p, "states");
  if (xis.empty()) throw ConfigError("key 'xi' must not be empty");

  struct Task {
    double xi;
    bool flea;
  };
  std::vector<Task> tasks;
  for (double xi : xis) {
    if (flea_mode != "on") tasks.push_back({xi, false});
    if (flea_mode != "off") tasks.push_back({xi, true});
  }

  struct Panel {
    Grid grid;
    EigenSystem es;
    std::vector<double> wells;
    WellPartition part;
  };
  auto panels = parallel_map(tasks.size(), c.workers, [&](std::size_t i) {
    const auto& t = tasks[i];
    ModelParams params = ModelParams::semiclassical(t.xi, p.real("lambda"), p.real("a"));
    const double flea_scale = p.real("epsilon");
    if (potential == "nwell") {
      const int n = static_cast<int>(count(p, "n_wells", 2));
      std::vector<PerturbationSpec> fleas;
      if (t.flea) {
        fleas.emplace_back(ParabolicBump{params.a, 0.5 * params.a, p.real("flea_height") * flea_scale});
      }
      auto sys = nwell_spectrum(params, n, fleas, count(p, "points_per_well", 8));
      return Panel{sys.grid, sys.system, {}, sys.partition};
    }
    Grid grid = well_grid(params, count(p, "points", 8));
    PotentialSpec pot = potential == "quadratic" ? PotentialSpec{Quadratic{p.real("omega")}, {}} : double_well(params);
    if (t.flea) pot = pot.with(default_flea(params, p.real("flea_height")), flea_scale);
    auto es = lowest_eigenpairs(build_hamiltonian(grid, eval_potential(pot, grid), params), k);
    return Panel{grid, std::move(es), {}, partition_for(pot, grid)};
  });

  CsvTable energies({"xi", "flea", "n", "energy", "well", "probability"});
  CsvTable states({"xi", "flea", "n", "x", "psi"});
  std::vector<cli::Panel> svg;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& es = panels[i].es;
    const std::string tag = tasks[i].flea ? "on" : "off";
    cli::Panel sp;
    sp.title = "xi = " + format_real(tasks[i].xi) + ", flea " + tag;
    sp.x_label = "x";
    sp.y_label = "psi_n(x)";
    for (std::size_t n = 0; n < es.size(); ++n) {
      const auto probs = well_probability(es.states[n], panels[i].part);
      for (std::size_t w = 0; w < probs.size(); ++w) {
        energies.add({tasks[i].xi, tag, static_cast<long long>(n), es.energies[n], static_cast<long long>(w), probs[w]});
      }
      Series s{"n = " + std::to_string(n), {}, {}};
      const auto re = es.states[n].real_part();
      for (std::size_t j = 0; j < re.size(); ++j) {
        states.add({tasks[i].xi, tag, static_cast<long long>(n), panels[i].grid.x(j), re[j]});
        s.x.push_back(panels[i].grid.x(j));
        s.y.push_back(re[j]);
      }
      if (n < 2) sp.series.push_back(std::move(s));
    }
    svg.push_back(std::move(sp));
  }
  energies.write(dir / "eigensolve_energies.csv");
  states.write(dir / "eigensolve_states.csv");
  write_line_svg(dir / "eigensolve.svg", svg, flea_mode == "both" ? 2 : 1);
  return {"eigensolve_energies.csv", "eigensolve_states.csv", "eigensolve.svg"};
}

// --- flea-sweep -------------------------------------------------------------

Files flea_sweep(const ExperimentConfig& c, const fs::path& dir) {
  const auto& p = c.params;
  const auto eps = p.list("eps");
  CsvTable curves({"xi", "epsilon", "p_left"});
  CsvTable crossings({"xi", "level", "epsilon_crossing"});
  cli::Panel panel{"Left-well probability", "epsilon", "P(left)", {}, true, false, false};
  for (double xi : p.list("xi")) {
    const ModelParams params = ModelParams::semiclassical(xi, p.real("lambda"), p.real("a"));
    const auto curve = flea_sensitivity_sweep(params, default_flea(params, p.real("flea_height")), eps,
                                              well_grid(params, count(p, "points", 8)), c.workers);
    Series s{"xi = " + format_real(xi), curve.epsilon, curve.left_well_probability};
    for (std::size_t i = 0; i < curve.epsilon.size(); ++i) curves.add({xi, curve.epsilon[i], curve.left_well_probability[i]});
    const auto cross = crossing_epsilon(curve, p.real("level"));
    crossings.add({xi, p.real("level"), cross ? Cell{*cross} : Cell{std::string("none")}});
    panel.series.push_back(std::move(s));
  }
  curves.write(dir / "flea_sweep.csv");
  crossings.write(dir / "flea_sweep_crossings.csv");
  write_line_svg(dir / "flea_sweep.svg", {panel});
  return {"flea_sweep.csv", "flea_sweep_crossings.csv", "flea_sweep.svg"};
}

// --- nwell ------------------------------------------------------------------

Files nwell(const ExperimentConfig& c, const fs::path& dir) {
  const auto& p = c.params;
  const ModelParams params = ModelParams::semiclassical(p.real("xi"), p.real("lambda"), p.real("a"));
  const int n = static_cast<int>(count(p, "n_wells", 2));
  const double width = 2.0 * params.a;
  const double origin = width * std::floor(-n * params.a / width);
  std::vector<PerturbationSpec> fleas;
  for (double w : p.list("flea_wells")) {
    if (w != std::floor(w) || w < 0 || w >= n) throw ConfigError("key 'flea_wells' holds an invalid well index");
    const double center = origin + (w + 0.5) * width;
    if (center - 0.5 * params.a < -n * params.a || center + 0.5 * params.a > n * params.a) {
      throw ConfigError("key 'flea_wells': well " + format_real(w) + " straddles the periodic seam");
    }
    fleas.emplace_back(ParabolicBump{center, 0.5 * params.a, p.real("flea_height")});
  }
  const auto sys = nwell_spectrum(params, n, fleas, count(p, "points_per_well", 8));
  std::vector<std::string> header{"n", "energy"};
  for (int w = 0; w < n; ++w) header.push_back("well_" + std::to_string(w));
  CsvTable table(header);
  CsvTable states({"n", "x", "psi"});
  cli::Panel panel{"Periodic potential, xi = " + format_real(p.real("xi")), "x", "psi_n(x)", {}, false, false, false};
  for (std::size_t k = 0; k < sys.system.size(); ++k) {
    const auto probs = well_probability(sys.system.states[k], sys.partition);
    std::vector<Cell> row{static_cast<long long>(k), sys.system.energies[k]};
    for (double q : probs) row.emplace_back(q);
    table.add(row);
    Series s{"n = " + std::to_string(k), {}, {}};
    const auto re = sys.system.states[k].real_part();
    for (std::size_t j = 0; j < re.size(); ++j) {
      states.add({static_cast<long long>(k), sys.grid.x(j), re[j]});
      s.x.push_back(sys.grid.x(j));
      s.y.push_back(re[j]);
    }
    panel.series.push_back(std::move(s));
  }
  table.write(dir / "nwell.csv");
  states.write(dir / "nwell_states.csv");
  write_line_svg(dir / "nwell.svg", {panel});
  return {"nwell.csv", "nwell_states.csv", "nwell.svg"};
}

// --- dynamics ---------------------------------------------------------------

Files dynamics(const ExperimentConfig& c, const fs::path& dir) {
  const auto& p = c.params;
  const ModelParams params = ModelParams::semiclassical(p.real("xi"));
  const Grid grid = make_grid(-3.0 * params.a, 3.0 * params.a, count(p, "points", 8), Boundary::Dirichlet);
  const PerturbationSpec flea = default_flea(params, p.real("flea_height"));
  const double dt = p.real("dt");

  if (p.choice("mode") == "quench-study") {
    QuenchStudyConfig qc{params, flea, grid, dt, count(p, "stride"), 0.95};
    const auto stats = quench_localization_study(qc, p.list("eps"), p.real("horizon"), c.workers);
    CsvTable t({"epsilon", "time_averaged_p_left", "min_p_left", "max_p_left", "max_sustained_window",
                "window_fraction", "perturbed_period"});
    cli::Panel panel{"Quench: time-averaged P(left)", "epsilon", "<P(left)>", {}, true, false, true};
    Series s{"", {}, {}};
    for (const auto& q : stats) {
      t.add({q.epsilon, q.time_averaged_p_left, q.min_p_left, q.max_p_left, q.max_sustained_window, q.window_fraction,
             q.perturbed_period});
      if (q.epsilon > 0) {
        s.x.push_back(q.epsilon);
        s.y.push_back(q.time_averaged_p_left);
      }
    }
    panel.series.push_back(s);
    t.write(dir / "quench_study.csv");
    write_line_svg(dir / "quench_study.svg", {panel});
    return {"quench_study.csv", "quench_study.svg"};
  }

  const std::string kind = p.choice("schedule");
  RampSchedule::Kind k = Quench{p.real("epsilon"), 0.0};
  if (kind == "sin-ramp") k = SinRamp{p.real("T")};
  if (kind == "white-noise") k = WhiteNoise{p.real("amplitude"), p.real("dt_noise"), c.seed};
  if (kind == "kicks") k = PoissonKicks{p.real("rate"), p.real("kick_scale"), c.seed};
  const double t_end = p.real("t_end");
  const RampSchedule schedule(k, flea, t_end + 1.0);
  const auto base = build_hamiltonian(grid, eval_potential(double_well(params), grid), params);
  const auto psi0 = lowest_eigenpairs(base, 2).states[0];
  PropagateOptions opts;
  opts.stride = count(p, "stride");
  opts.keep_states = false;
  const auto traj = propagate(psi0, base, schedule, dt, t_end, opts);
  CsvTable t({"t", "scale", "norm", "energy", "p_left"});
  Series s{"", traj.times, {}};
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& o = traj.observables[i];
    t.add({traj.times[i], traj.flea_values[i], o.norm, o.energy, o.left_well_probability});
    s.y.push_back(o.left_well_probability);
  }
  t.write(dir / "dynamics.csv");
  write_line_svg(dir / "dynamics.svg", {cli::Panel{"Schedule " + kind, "t", "P(left)", {s}, false, false, false}});
  return {"dynamics.csv", "dynamics.svg"};
}

// --- gamma-scan -------------------------------------------------------------

Files gamma(const ExperimentConfig& c, const fs::path& dir) {
  const auto& p = c.params;
  auto hbars = p.list("hbar");
  if (hbars.empty()) hbars = gamma_hbar_grid(9);
  const auto scan = gamma_scan(hbars, default_flea(ModelParams{}, p.real("flea_height")),
                               static_cast<int>(count(p, "shrink", 0)), c.workers);
  CsvTable t({"hbar", "inverse_hbar", "delta", "matrix_element", "gamma", "log10_gamma",
              "shrunk_max_well_probability"});
  Series s{"log10 Gamma", {}, {}};
  Series fit{"fit", {}, {}};
  for (const auto& g : scan.points) {
    t.add({g.hbar, 1.0 / g.hbar, g.delta, g.matrix_element, g.gamma, g.log10_gamma, g.shrunk_max_well_probability});
    s.x.push_back(1.0 / g.hbar);
    s.y.push_back(g.log10_gamma);
    fit.x.push_back(1.0 / g.hbar);
    fit.y.push_back(scan.intercept + scan.slope / g.hbar);
  }
  CsvTable f({"slope", "intercept", "r_squared", "shrink_exponent", "excluded"});
  f.add({scan.slope, scan.intercept, scan.r_squared, static_cast<long long>(scan.shrink_exponent),
         static_cast<long long>(scan.excluded_hbar.size())});
  t.write(dir / "gamma_scan.csv");
  f.write(dir / "gamma_fit.csv");
  write_line_svg(dir / "gamma_scan.svg", {cli::Panel{"Collapse times", "1/hbar", "log10 Gamma", {s, fit}, false, false, true}});
  return {"gamma_scan.csv", "gamma_fit.csv", "gamma_scan.svg"};
}

// --- husimi / converge ------------------------------------------------------

std::function<WaveFunction(double)> family(const ParamMap& p, bool with_flea) {
  const std::size_t points = count(p, "points", 8);
  const double height = p.real("flea_height"), eps = p.real("epsilon");
  return [=](double hbar) {
    const ModelParams params = ModelParams::semiclassical(hbar);
    PotentialSpec pot = double_well(params);
    if (with_flea) pot = pot.with(default_flea(params, height), eps);
    return ground_state(pot, params, well_grid(params, points));
  };
}

Files husimi(const ExperimentConfig& c, const fs::path& dir) {
  const auto& p = c.params;
  const double hbar = p.real("xi");
  PhaseSpaceGrid g{p.real("p_min"), p.real("p_max"), p.real("q_min"), p.real("q_max"), count(p, "n_p"), count(p, "n_q")};
  g.validate();
  const WaveFunction psi = family(p, p.choice("state") == "flea")(hbar);
  const auto mu = husimi_measure(psi, hbar, g, c.workers);
  CsvTable t({"p", "q", "density"});
  for (std::size_t i = 0; i < g.n_p; ++i) {
    for (std::size_t j = 0; j < g.n_q; ++j) t.add({g.p(i), g.q(j), mu.at(i, j)});
  }
  const auto mean = mu.mean();
  const double left = mu.integrate([](double, double q) { return q < 0 ? 1.0 : 0.0; });
  CsvTable s({"mass", "mean_p", "mean_q", "left_mass"});
  s.add({mu.mass(), mean.p, mean.q, left});
  t.write(dir / "husimi.csv");
  s.write(dir / "husimi_summary.csv");
  write_heatmap_svg(dir / "husimi.svg", "Husimi density, hbar = " + format_real(hbar), "p", "q", g.p_min, g.p_max,
                    g.q_min, g.q_max, g.n_p, g.n_q, mu.density);
  return {"husimi.csv", "husimi_summary.csv", "husimi.svg"};
}

Files converge(const ExperimentConfig& c, const fs::path& dir) {
  const auto& p = c.params;
  const bool flea = p.choice("family") == "flea";
  const double a = ModelParams{}.a;
  const auto f = TestFunction::bump({p.real("center_p"), p.real("center_q")}, p.real("radius"));
  const ClassicalState limit = flea ? ClassicalState::point({0.0, -a}) : ClassicalState::symmetric_mixture(a);
  const auto table = weak_convergence_check(
      p.list("hbar"), family(p, flea), f, limit,
      [](double) { return PhaseSpaceGrid{-3.0, 3.0, -3.0, 3.0, 128, 128}; }, c.workers);
  CsvTable t({"hbar", "pairing", "limit_pairing", "abs_error"});
  Series s{"", {}, {}};
  for (const auto& r : table.rows) {
    t.add({r.hbar, r.pairing, r.limit_pairing, r.abs_error});
    s.x.push_back(r.hbar);
    s.y.push_back(r.abs_error);
  }
  CsvTable m({"monotone_decreasing"});
  m.add({static_cast<long long>(table.monotone_decreasing)});
  t.write(dir / "converge.csv");
  m.write(dir / "converge_summary.csv");
  write_line_svg(dir / "converge.svg",
                 {cli::Panel{"Weak convergence (" + p.choice("family") + ")", "hbar", "|error|", {s}, true, true, true}});
  return {"converge.csv", "converge_summary.csv", "converge.svg"};
}

// --- toy model --------------------------------------------------------------

Files toy_drift(const ExperimentConfig& c, const fs::path& dir) {
  const auto& p = c.params;
  const std::size_t d = count(p, "d", 2), n = count(p, "instances");
  const bool diagonal = p.choice("flavor") == "diagonal";
  std::vector<double> eps = diagonal ? std::vector<double>{0.0} : p.list("eps");
  CsvTable rows({"eps", "instance", "drift", "off_block_norm"});
  CsvTable summary({"eps", "instances", "max_drift", "bound", "bound_24eps", "holds"});
  for (double e : eps) {
    const toy::Flavor flavor = diagonal ? toy::Flavor::diagonal() : toy::Flavor::almost_diagonal(e);
    struct R {
      double drift, off;
    };
    const auto res = parallel_map(n, c.workers, [&](std::size_t i) {
      const auto s = instance_seed(c.seed, i);
      const auto u = toy::make_block_unitary(d, flavor, s);
      const auto psi = toy::JointState::random(d, instance_seed(s, 1));
      return R{toy::diagonal_drift(u, psi).drift, u.off_block_norm};
    });
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rows.add({e, static_cast<long long>(i), res[i].drift, res[i].off});
      worst = std::max(worst, res[i].drift);
    }
    const double bound = toy::drift_bound(e);
    const bool holds = diagonal ? worst <= 1e-12 : (worst < bound && worst < 24.0 * e);
    summary.add({e, static_cast<long long>(n), worst, bound, 24.0 * e, static_cast<long long>(holds)});
  }
  rows.write(dir / "toy_drift.csv");
  summary.write(dir / "toy_drift_summary.csv");
  return {"toy_drift.csv", "toy_drift_summary.csv"};
}

Files toy_bound(const ExperimentConfig& c, const fs::path& dir) {
  const auto& p = c.params;
  const std::size_t d = count(p, "d", 2), n = count(p, "instances");
  const double e1 = p.real("eps1"), e2 = p.real("eps2");
  const auto res = parallel_map(n, c.workers, [&](std::size_t i) {
    return toy::counterfactual_bound_check(d, e1, e2, instance_seed(c.seed, i));
  });
  CsvTable rows({"instance", "lhs", "rhs", "ratio", "holds", "max_unitary_gap", "max_record_gap"});
  double worst = 0.0;
  bool all = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = res[i];
    const double ratio = r.rhs > 0 ? r.lhs / r.rhs : 0.0;
    worst = std::max(worst, ratio);
    all = all && r.holds;
    rows.add({static_cast<long long>(i), r.lhs, r.rhs, ratio, static_cast<long long>(r.holds), r.max_unitary_gap,
              r.max_record_gap});
  }
  CsvTable summary({"eps1", "eps2", "instances", "worst_ratio", "all_hold", "adversarial_ratio"});
  Cell adversarial = std::string("n/a");
  if (e1 > 0 && e2 > 0) adversarial = toy::counterfactual_adversarial(d, e1, e2, c.seed).worst_ratio;
  summary.add({e1, e2, static_cast<long long>(n), worst, static_cast<long long>(all), adversarial});
  rows.write(dir / "toy_bound.csv");
  summary.write(dir / "toy_bound_summary.csv");
  return {"toy_bound.csv", "toy_bound_summary.csv"};
}

Files sg(const ExperimentConfig& c, const fs::path& dir) {
  const auto& p = c.params;
  const toy::cplx alpha(p.real("alpha_re"), p.real("alpha_im")), beta(p.real("beta_re"), p.real("beta_im"));
  const auto r = toy::stern_gerlach_density(alpha, beta, {p.real("center_plus"), p.real("center_minus"), p.real("sigma")},
                                            {p.real("slit_lo"), p.real("slit_hi")});
  CsvTable t({"matrix", "i", "j", "re", "im"});
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      t.add({std::string("normalized"), static_cast<long long>(i), static_cast<long long>(j), r.state.rho(i, j).real(),
             r.state.rho(i, j).imag()});
    }
  }
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      t.add({std::string("raw"), static_cast<long long>(i), static_cast<long long>(j), r.raw(i, j).real(),
             r.raw(i, j).imag()});
    }
  }
  CsvTable s({"captured"});
  s.add({r.captured});
  t.write(dir / "sg.csv");
  s.write(dir / "sg_summary.csv");
  return {"sg.csv", "sg_summary.csv"};
}

// --- spin chain -------------------------------------------------------------

Files spinchain(const ExperimentConfig& c, const fs::path& dir) {
  const auto& p = c.params;
  const auto sizes = p.list("N");
  const double eps = p.real("eps");
  const std::size_t k = count(p, "k");
  for (double n : sizes) {
    if (n != std::floor(n)) throw ConfigError("key 'N' must hold integers");
  }
  const auto res = parallel_map(sizes.size(), c.workers, [&](std::size_t i) {
    spin::ChainSpec spec{static_cast<int>(sizes[i]), p.real("B"),
                         p.choice("variant") == "transverse" ? spin::Variant::TransverseField : spin::Variant::AsPrinted,
                         p.choice("boundary") == "ring" ? spin::Boundary::Ring : spin::Boundary::Open};
    std::optional<spin::SpinFlea> flea;
    if (eps != 0.0) flea = spin::SpinFlea{spin::all_up_index(), eps};
    return spin::chain_ground_analysis(spec, flea, k, 1, spin::kLanczosTol, c.seed);
  });
  CsvTable t({"N", "B", "eps", "E0", "E1", "splitting", "polarization", "iterations"});
  Series split{"splitting", {}, {}}, pol{"polarization", {}, {}};
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto& r = res[i];
    const double e1 = r.energies.size() > 1 ? r.energies[1] : std::nan("");
    t.add({static_cast<long long>(sizes[i]), p.real("B"), eps, r.energies[0], e1, r.splitting, r.polarization,
           static_cast<long long>(r.iterations)});
    split.x.push_back(sizes[i]);
    split.y.push_back(r.splitting);
    pol.x.push_back(sizes[i]);
    pol.y.push_back(r.polarization);
  }
  t.write(dir / "spinchain.csv");
  write_line_svg(dir / "spinchain.svg", {cli::Panel{"Lowest doublet splitting", "N", "E1 - E0", {split}, false, true, true},
                                         cli::Panel{"Ground-state polarization", "N", "|<M>|/N", {pol}, false, false, true}},
                 2);
  return {"spinchain.csv", "spinchain.svg"};
}

}  // namespace

std::vector<std::string> run_experiment(const ExperimentConfig& config, const fs::path& dir) {
  static const std::map<std::string, std::function<Files(const ExperimentConfig&, const fs::path&)>> table = {
      {"eigensolve", eigensolve}, {"flea-sweep", flea_sweep}, {"nwell", nwell},        {"dynamics", dynamics},
      {"gamma-scan", gamma},      {"husimi", husimi},         {"converge", converge},  {"toy-drift", toy_drift},
      {"toy-bound", toy_bound},   {"sg", sg},                 {"spinchain", spinchain}};
  const auto it = table.find(config.experiment);
  if (it == table.end()) throw ConfigError("unknown experiment '" + config.experiment + "'");
  return it->second(config, dir);
}

}  // namespace flea::cli
