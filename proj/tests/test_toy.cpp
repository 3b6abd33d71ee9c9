#include <doctest.h>

#include <cmath>
#include <numbers>

#include "flea/errors.hpp"
#include "flea/toy.hpp"

using namespace flea;
using namespace flea::toy;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

TEST_CASE("haar unitaries are unitary and seeded") {
  const CMat u = haar_unitary(16, 3);
  CHECK((u.adjoint() * u - CMat::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(u == haar_unitary(16, 3));
  CHECK(u != haar_unitary(16, 4));
}

TEST_CASE("schmidt decomposition recomposes") {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto psi = JointState::random(8, s);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-14));
    const auto sd = schmidt_decompose(psi);
    CHECK(sd.c1 >= sd.c2);
    CHECK(sd.c2 >= 0.0);
    CHECK(sd.c1 * sd.c1 + sd.c2 * sd.c2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((sd.recompose().amp - psi.amp).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sd.system.adjoint() * sd.system - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(sd.environment.col(0).dot(sd.environment.col(1))) < 1e-12);
  }
  const auto prod = JointState::product(1, CVec::Unit(4, 2));
  const auto sd = schmidt_decompose(prod);
  CHECK(sd.c1 == doctest::Approx(1.0));
  CHECK(sd.c2 < 1e-14);
}

TEST_CASE("reduced state against a direct partial trace") {
  const auto psi = JointState::random(6, 9);
  const auto r = reduce(psi);
  r.validate();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      cplx s = 0;
      for (Eigen::Index k = 0; k < 6; ++k) s += psi.amp(i, k) * std::conj(psi.amp(j, k));
      CHECK(std::abs(r.rho(i, j) - s) < 1e-14);
    }
  }
  ReducedState bad{Eigen::Matrix2cd::Identity()};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("diagonal unitaries leave pointer weights unchanged") {
  for (std::uint64_t s = 1; s <= 50; ++s) {
    const auto u = make_block_unitary(16, Flavor::diagonal(), s);
    CHECK(u.off_block_norm == 0.0);
    CHECK(u.unitarity_error() < 1e-12);
    CHECK(diagonal_drift(u, JointState::random(16, 1000 + s)).drift < 1e-12);
  }
}

TEST_CASE("almost diagonal drift stays under the bound") {
  CHECK(drift_bound(0.0) == 0.0);
  CHECK(drift_bound(0.01) == doctest::Approx(0.01 * (4 + 0.04 + 8 * std::sqrt(1.01))).epsilon(1e-15));
  for (double eps : {1e-3, 1e-2}) {
    double worst = 0;
    for (std::uint64_t s = 1; s <= 200; ++s) {
      const auto u = make_block_unitary(16, Flavor::almost_diagonal(eps), s);
      CHECK(u.off_block_norm <= eps * (1 + 1e-12));
      CHECK(u.unitarity_error() < 1e-12);
      const auto d = diagonal_drift(u, JointState::random(16, 5000 + s));
      CHECK(d.initial_diag.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(d.final_diag.sum() == doctest::Approx(1.0).epsilon(1e-12));
      worst = std::max(worst, d.drift);
    }
    CHECK(worst <= drift_bound(eps));
    CHECK(worst > 0);
  }
}

TEST_CASE("counterfactual bound") {
  for (std::uint64_t s = 1; s <= 100; ++s) {
    const auto b = counterfactual_bound_check(16, 1e-2, 1e-2, s);
    CHECK(b.holds);
    CHECK(b.lhs < b.rhs);
    CHECK(b.max_unitary_gap <= 1e-2 * (1 + 1e-12));
    CHECK(b.max_record_gap <= 1e-2 * (1 + 1e-12));
  }
  const auto v = counterfactual_bound_check(16, 0.0, 0.0, 1);
  CHECK(v.lhs == 0.0);
  CHECK(v.rhs == 0.0);
  CHECK(v.holds);
  CHECK_THROWS_AS(counterfactual_bound_check(16, -1e-3, 1e-2, 1), DomainError);

  const auto adv = counterfactual_adversarial(16, 1e-2, 1e-2, 1);
  CHECK(adv.worst_ratio <= 1.0);
  CHECK(adv.worst_ratio > 0.5);
}

TEST_CASE("almost orthogonal states stay apart") {
  const auto r = almost_ortho_check(0.1, 1000, 2);
  CHECK(r.all_above);
  CHECK(r.bound == doctest::Approx(std::sqrt(1.8)));
  CHECK(r.eta == doctest::Approx(std::numbers::sqrt2 - std::sqrt(1.8)));
  CHECK(r.worst_distance == doctest::Approx(r.bound).epsilon(1e-12));
  CHECK(almost_ortho_check(0.0, 10, 2).worst_distance == doctest::Approx(std::numbers::sqrt2));
  CHECK_THROWS_AS(almost_ortho_check(1.5, 10, 2), DomainError);
}

TEST_CASE("stern gerlach densities match closed forms") {
  const cplx alpha(std::sqrt(0.5), 0), beta(0, std::sqrt(0.5));
  const Packets pk{3.0, -3.0, 1.0};
  const auto full = stern_gerlach_density(alpha, beta, pk, {});
  full.state.validate();
  CHECK(full.captured == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(full.state.rho(0, 0).real() == doctest::Approx(0.5).epsilon(1e-13));
  // Overlap of the packets: exp(-(c+ - c-)^2 / 8 sigma^2).
  CHECK(std::abs(full.state.rho(0, 1)) == doctest::Approx(0.5 * std::exp(-4.5)).epsilon(1e-10));
  CHECK(std::abs(full.raw(0, 1) - full.state.rho(0, 1)) < 1e-15);

  const auto half = stern_gerlach_density(alpha, beta, pk, {0.0, std::numeric_limits<double>::infinity()});
  CHECK(half.raw(0, 0).real() == doctest::Approx(0.5 * normal_cdf(3)).epsilon(1e-12));
  CHECK(half.raw(1, 1).real() == doctest::Approx(0.5 * normal_cdf(-3)).epsilon(1e-10));
  CHECK(std::abs(half.raw(0, 1)) == doctest::Approx(0.25 * std::exp(-4.5)).epsilon(1e-10));
  CHECK(half.captured == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(half.state.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-14));

  const auto single = stern_gerlach_density(1.0, 0.0, pk, {0.0, std::numeric_limits<double>::infinity()});
  CHECK(single.state.rho(0, 0).real() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(single.state.rho(1, 1)) == 0.0);
  CHECK(std::abs(single.state.rho(0, 1)) == 0.0);

  CHECK_THROWS_AS(stern_gerlach_density(1.0, 1.0, pk, {}), DomainError);
  CHECK_THROWS_AS(stern_gerlach_density(0.0, 1.0, pk, {20.0, 30.0}), DomainError);
  CHECK_THROWS_AS(stern_gerlach_density(alpha, beta, {3, -3, 0}, {}), DomainError);
  CHECK_THROWS_AS(stern_gerlach_density(alpha, beta, pk, {1.0, 1.0}), DomainError);
}
