#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "flea/core.hpp"
#include "flea/errors.hpp"
#include "flea/spectral.hpp"
#include "flea/tridiag.hpp"

using namespace flea;

namespace {

Eigen::MatrixXd dense(const TridiagOperator& h) {
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = h.entry(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  return m;
}

}  // namespace

TEST_CASE("dirichlet grid spacing and center node") {
  const Grid g = make_grid(-4, 4, 801, Boundary::Dirichlet);
  CHECK(g.spacing() == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(std::abs(g.x(400)) < 1e-14);
  CHECK(g.x(800) == doctest::Approx(4.0));
  CHECK(g.mirror_symmetric());
}

TEST_CASE("periodic grid omits the right endpoint") {
  const Grid g = make_grid(-4, 4, 1024, Boundary::Periodic);
  CHECK(g.spacing() == 8.0 / 1024);
  CHECK(g.x(0) == -4.0);
  CHECK(g.x(1023) == doctest::Approx(4.0 - 8.0 / 1024));
}

TEST_CASE("reversed or tiny grids are rejected") {
  CHECK_THROWS_AS(make_grid(1, -1, 100, Boundary::Dirichlet), DomainError);
  CHECK_THROWS_AS(make_grid(-1, 1, 4, Boundary::Dirichlet), DomainError);
}

TEST_CASE("model parameters validate") {
  ModelParams p;
  p.hbar = -1;
  CHECK_THROWS_AS(p.validate(), DomainError);
  const auto q = ModelParams::semiclassical(0.3);
  CHECK(q.hbar == 0.3);
  CHECK(q.mass == 1.0);
  CHECK(q.barrier_height() == 0.125);
}

TEST_CASE("potential values") {
  const PotentialSpec dw{SymmetricDoubleWell{1, 1}, {}};
  CHECK(dw(1.0) == 0.0);
  CHECK(dw(-1.0) == 0.0);
  CHECK(dw(0.0) == 0.125);

  const PotentialSpec cs{PeriodicCosSq{1, 1, 4}, {}};
  CHECK(cs(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(cs(1.0)) < 1e-15);

  const auto with = dw.with(PerturbationSpec(ParabolicBump{0.5, 0.2, 1e-4}), 1.0);
  const double base = 0.125 * std::pow(0.25 - 1.0, 2);
  CHECK(with(0.5) == doctest::Approx(base + 1e-4).epsilon(1e-15));
  CHECK(with(0.8) == doctest::Approx(0.125 * std::pow(0.64 - 1.0, 2)).epsilon(1e-15));
}

TEST_CASE("scale overrides and support checks") {
  const Grid g = make_grid(-2, 2, 401, Boundary::Dirichlet);
  const PerturbationSpec w(GaussianBump{0.5, 0.05, 2.0});
  const auto spec = PotentialSpec{SymmetricDoubleWell{1, 1}, {}}.with(w, 1.0);
  const std::vector<double> zero{0.0};
  const auto v0 = eval_potential(spec, g, std::span<const double>(zero));
  const auto vb = eval_potential(PotentialSpec{SymmetricDoubleWell{1, 1}, {}}, g);
  CHECK(v0 == vb);
  const std::vector<double> two{0.0, 1.0};
  CHECK_THROWS_AS(eval_potential(spec, g, std::span<const double>(two)), DomainError);
  CHECK_THROWS_AS(eval_perturbation(PerturbationSpec(ParabolicBump{1.9, 0.5, 1.0}), g), DomainError);
}

TEST_CASE("free particle stencil") {
  const Grid g = make_grid(0, 19, 20, Boundary::Dirichlet);
  ModelParams p;
  p.hbar = 1;
  const std::vector<double> v(20, 0.0);
  const auto h = build_hamiltonian(g, v, p);
  for (double d : h.diag) CHECK(d == 1.0);
  for (double o : h.off) CHECK(o == -0.5);
  CHECK(h.corner == 0.0);

  const auto hp = build_hamiltonian(make_grid(0, 20, 20, Boundary::Periodic), v, p);
  CHECK(hp.corner == -0.5);
  CHECK(hp.entry(0, 19) == -0.5);
}

TEST_CASE("assembled hamiltonian is exactly symmetric") {
  const auto p = ModelParams::semiclassical(0.3);
  const Grid g = make_grid(-3, 3, 300, Boundary::Periodic);
  const auto h = build_hamiltonian(g, eval_potential(double_well(p), g), p);
  const auto m = dense(h);
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant potential shifts eigenvalues by the constant") {
  const auto p = ModelParams::semiclassical(0.5);
  const Grid g = make_grid(-4, 4, 400, Boundary::Dirichlet);
  auto v = eval_potential(double_well(p), g);
  const auto e0 = lowest_eigenpairs(build_hamiltonian(g, v, p), 4).energies;
  for (auto& x : v) x += 0.75;
  const auto e1 = lowest_eigenpairs(build_hamiltonian(g, v, p), 4).energies;
  for (std::size_t i = 0; i < 4; ++i) CHECK(e1[i] - e0[i] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("eigenvalues agree with a dense solver") {
  const auto p = ModelParams::semiclassical(0.4);
  const Grid g = make_grid(-4, 4, 512, Boundary::Dirichlet);
  const auto h = build_hamiltonian(g, eval_potential(double_well(p), g), p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(dense(h));
  const auto es = lowest_eigenpairs(h, 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(es.energies[i] == doctest::Approx(oracle.eigenvalues()(static_cast<Eigen::Index>(i))).epsilon(1e-10));
  }
}

TEST_CASE("ground energy at xi 0.6 on 2048 points matches a QL oracle") {
  const auto p = ModelParams::semiclassical(0.6);
  const Grid g = make_grid(-4, 4, 2048, Boundary::Dirichlet);
  const auto h = build_hamiltonian(g, eval_potential(double_well(p), g), p);
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(h.diag.data(), static_cast<Eigen::Index>(h.size()));
  Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(h.off.data(), static_cast<Eigen::Index>(h.size() - 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle;
  oracle.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
  const auto es = lowest_eigenpairs(h, 2);
  CHECK(es.energies[0] == doctest::Approx(oracle.eigenvalues()(0)).epsilon(1e-8));
}

TEST_CASE("periodic eigenvalues agree with a dense solver") {
  ModelParams p;
  p.hbar = 0.3;
  const Grid g = make_grid(-3, 3, 240, Boundary::Periodic);
  const auto v = eval_potential(PotentialSpec{PeriodicCosSq{0.125, 1, 3}, {}}, g);
  const auto h = build_hamiltonian(g, v, p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(dense(h));
  const auto es = lowest_eigenpairs(h, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(es.energies[i] == doctest::Approx(oracle.eigenvalues()(static_cast<Eigen::Index>(i))).epsilon(1e-10));
  }
}

TEST_CASE("tridiagonal sturm count brackets eigenvalues") {
  tridiag::Matrix<double> m{{2, 2, 2, 2, 2}, {-1, -1, -1, -1}, 0.0};
  // Eigenvalues 2 - 2 cos(k pi / 6).
  for (std::size_t k = 0; k < 5; ++k) {
    const double exact = 2 - 2 * std::cos(static_cast<double>(k + 1) * M_PI / 6);
    CHECK(tridiag::eigenvalue(m, k) == doctest::Approx(exact).epsilon(1e-14));
    CHECK(tridiag::count_below(m, exact + 1e-9) == k + 1);
  }
}

TEST_CASE("wave functions normalize in the discrete norm") {
  const Grid g = make_grid(-1, 1, 101, Boundary::Dirichlet);
  std::vector<double> v(101, 3.0);
  const auto psi = WaveFunction::from_real(g, v);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(discrete_norm(psi.amplitudes(), g.spacing()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(WaveFunction::from_real(g, std::vector<double>(101, 0.0)), DomainError);
  CHECK_THROWS_AS(WaveFunction::from_real(g, std::vector<double>(10, 1.0)), DomainError);
}
