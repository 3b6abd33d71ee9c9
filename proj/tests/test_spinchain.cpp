#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "flea/errors.hpp"
#include "flea/spinchain.hpp"

using namespace flea;
using namespace flea::spin;

namespace {

// Dense H from Kronecker products of Pauli matrices; qubit i is tensor
// factor i counted from the least significant bit.
Eigen::MatrixXd dense_chain(const ChainSpec& spec, const std::optional<SpinFlea>& flea) {
  const int n = spec.N;
  Eigen::Matrix2d z, x, id;
  z << 1, 0, 0, -1;
  x << 0, 1, 1, 0;
  id.setIdentity();
  auto site_op = [&](const std::vector<std::pair<int, Eigen::Matrix2d>>& ops) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(1, 1);
    for (int i = n - 1; i >= 0; --i) {
      Eigen::Matrix2d f = id;
      for (const auto& [site, op] : ops) {
        if (site == i) f = op;
      }
      Eigen::MatrixXd next(m.rows() * 2, m.cols() * 2);
      for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = m(r, c) * f;
      }
      m = next;
    }
    return m;
  };
  const auto dim = static_cast<Eigen::Index>(spec.dim());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  const int bonds = spec.boundary == Boundary::Ring ? n : n - 1;
  for (int i = 0; i < bonds; ++i) h -= site_op({{i, z}, {(i + 1) % n, z}});
  for (int i = 0; i < n; ++i) h -= spec.B * site_op({{i, spec.variant == Variant::AsPrinted ? z : x}});
  if (flea) h(static_cast<Eigen::Index>(flea->basis_index), static_cast<Eigen::Index>(flea->basis_index)) += flea->epsilon;
  return h;
}

}  // namespace

TEST_CASE("transverse ring matches a dense kronecker oracle") {
  const ChainSpec spec{8, 0.5, Variant::TransverseField, Boundary::Ring};
  const SpinFlea flea{all_up_index(), 1e-3};
  const Eigen::MatrixXd h = dense_chain(spec, flea);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(h);
  const auto a = chain_ground_analysis(spec, flea, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.energies[i] == doctest::Approx(oracle.eigenvalues()(static_cast<Eigen::Index>(i))).epsilon(1e-8));
  }
  CHECK(a.worst_residual < kLanczosTol * 16);

  std::vector<double> v(spec.dim()), y;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.37 * static_cast<double>(i) + 1.0);
  apply_hamiltonian(spec, flea, v, y, 3);
  const Eigen::VectorXd ref = h * Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(y[i] == doctest::Approx(ref(static_cast<Eigen::Index>(i))).epsilon(1e-13));
}

TEST_CASE("as printed chain matches enumeration") {
  for (int n = 2; n <= 12; n += 2) {
    const ChainSpec spec{n, 0.3, Variant::AsPrinted, Boundary::Open};
    const SpinFlea flea{all_down_index(n), 0.05};
    const auto all = enumerate_spectrum(spec, flea);
    const auto a = chain_ground_analysis(spec, flea, 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(a.energies[i] - all[i]) <= 1e-12);
  }
  CHECK_THROWS_AS(enumerate_spectrum({4, 0.5, Variant::TransverseField, Boundary::Open}, std::nullopt), DomainError);
}

TEST_CASE("two-site closed forms") {
  const auto as = enumerate_spectrum({2, 0.25, Variant::AsPrinted, Boundary::Open}, std::nullopt);
  CHECK(as == std::vector<double>{-1.5, -0.5, 1.0, 1.0});
  const auto zero = enumerate_spectrum({2, 0.0, Variant::AsPrinted, Boundary::Open}, std::nullopt);
  CHECK(zero == std::vector<double>{-1.0, -1.0, 1.0, 1.0});

  const auto fl = chain_ground_analysis({2, 0.0, Variant::AsPrinted, Boundary::Open}, SpinFlea{all_up_index(), 1e-6}, 2);
  CHECK(std::abs(fl.splitting - 1e-6) <= 1e-12);
  CHECK(fl.energies[0] == -1.0);
  CHECK(std::abs(fl.states[0][all_down_index(2)]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fl.sector_weights[0][2] == doctest::Approx(1.0).epsilon(1e-12));

  const double b = 0.4, r = std::sqrt(1 + 4 * b * b);
  const auto tf = chain_ground_analysis({2, b, Variant::TransverseField, Boundary::Open}, std::nullopt, 4);
  const std::vector<double> want{-r, -1.0, 1.0, r};
  for (std::size_t i = 0; i < 4; ++i) CHECK(tf.energies[i] == doctest::Approx(want[i]).epsilon(1e-10));
}

TEST_CASE("spin flip pairing at zero field") {
  for (auto variant : {Variant::AsPrinted, Variant::TransverseField}) {
    const auto a = chain_ground_analysis({6, 0.0, variant, Boundary::Ring}, std::nullopt, 2);
    CHECK(a.energies[0] == doctest::Approx(-6.0).epsilon(1e-12));
    CHECK(a.splitting <= 1e-12);
  }
  const auto d = diagonal_energies({5, 0.0, Variant::AsPrinted, Boundary::Open}, std::nullopt);
  for (std::uint64_t i = 0; i < d.size(); ++i) CHECK(d[i] == d[all_down_index(5) ^ i]);
}

TEST_CASE("flea shifts are linear to first order") {
  const ChainSpec spec{6, 0.7, Variant::TransverseField, Boundary::Ring};
  const auto base = chain_ground_analysis(spec, std::nullopt, 2);
  const double weight = base.states[0][all_up_index()] * base.states[0][all_up_index()];
  const double eps = 1e-5;
  const auto moved = chain_ground_analysis(spec, SpinFlea{all_up_index(), eps}, 2);
  CHECK((moved.energies[0] - base.energies[0]) / eps == doctest::Approx(weight).epsilon(1e-3));

  const ChainSpec diag{6, 0.1, Variant::AsPrinted, Boundary::Open};
  const auto d0 = diagonal_energies(diag, std::nullopt);
  const auto d1 = diagonal_energies(diag, SpinFlea{17, 0.25});
  for (std::size_t i = 0; i < d0.size(); ++i) CHECK(d1[i] - d0[i] == (i == 17 ? 0.25 : 0.0));
}

TEST_CASE("polarization and splitting with chain length") {
  double prev_split = 1e9, prev_pol = -1;
  for (int n : {4, 6, 8, 10, 12}) {
    const auto a = chain_ground_analysis({n, 0.5, Variant::TransverseField, Boundary::Ring},
                                         SpinFlea{all_up_index(), 1e-8}, 2, 4);
    CHECK(a.splitting < prev_split);
    CHECK(a.polarization > prev_pol);
    double total = 0;
    for (double w : a.sector_weights[0]) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    prev_split = a.splitting;
    prev_pol = a.polarization;
  }
}

TEST_CASE("lanczos is deterministic across worker counts") {
  const ChainSpec spec{10, 0.5, Variant::TransverseField, Boundary::Ring};
  const auto a = chain_ground_analysis(spec, SpinFlea{0, 1e-6}, 2, 1);
  const auto b = chain_ground_analysis(spec, SpinFlea{0, 1e-6}, 2, 4);
  CHECK(a.energies == b.energies);
  CHECK(a.states == b.states);
}

TEST_CASE("spin chain argument errors") {
  CHECK_THROWS_AS(chain_ground_analysis({15, 0.5, Variant::TransverseField, Boundary::Open}, std::nullopt, 2),
                  DomainError);
  CHECK_THROWS_AS(chain_ground_analysis({4, 0.5, Variant::TransverseField, Boundary::Open}, std::nullopt, 7),
                  DomainError);
  CHECK_THROWS_AS(chain_ground_analysis({4, 0.5, Variant::TransverseField, Boundary::Open}, std::nullopt, 0),
                  DomainError);
  CHECK_THROWS_AS(diagonal_energies({4, 0.5, Variant::AsPrinted, Boundary::Open}, SpinFlea{16, 1.0}), DomainError);
  CHECK_THROWS_AS(diagonal_energies({2, 0.5, Variant::AsPrinted, Boundary::Ring}, std::nullopt), DomainError);
}
