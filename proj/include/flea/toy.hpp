#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>

#include <Eigen/Dense>

namespace flea::toy {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Pure state of system (2 levels) x environment (d levels); row i holds the
/// environment vector attached to pointer state |m_{i+1}>.
struct JointState {
  Eigen::Matrix<cplx, 2, Eigen::Dynamic> amp;

  std::size_t env_dim() const { return static_cast<std::size_t>(amp.cols()); }
  double norm() const { return amp.norm(); }
  CVec flat() const;  // (row 0, row 1)
  static JointState from_flat(const CVec& v);

  static JointState random(std::size_t d, std::uint64_t seed);
  // |m_i> (x) e, i in {0, 1}.
  static JointState product(int i, const CVec& e);
};

struct SchmidtData {
  double c1 = 0.0, c2 = 0.0;  // c1 >= c2 >= 0
  Eigen::Matrix2cd system;    // columns |S_1>, |S_2>
  CMat environment;           // d x 2, columns |E_1>, |E_2>

  JointState recompose() const;
};

SchmidtData schmidt_decompose(const JointState& psi);

struct Flavor {
  enum class Kind { Diagonal, AlmostDiagonal } kind = Kind::Diagonal;
  double eps = 0.0;

  static Flavor diagonal() { return {}; }
  static Flavor almost_diagonal(double eps) { return {Kind::AlmostDiagonal, eps}; }
};

struct BlockUnitary {
  std::size_t d = 0;
  CMat U11, U12, U21, U22;
  double off_block_norm = 0.0;  // max(||U12||, ||U21||), measured
  Flavor flavor;

  CMat assembled() const;
  double unitarity_error() const;      // max |U^dagger U - I|
  double diagonal_defect() const;      // max_i ||U_ii^dagger U_ii - I||
  JointState apply(const JointState& psi) const;
};

// Haar-random unitary via QR of a complex Ginibre matrix.
CMat haar_unitary(std::size_t n, std::uint64_t seed);

BlockUnitary make_block_unitary(std::size_t d, Flavor flavor, std::uint64_t seed);

struct ReducedState {
  Eigen::Matrix2cd rho;

  void validate(double tol = 1e-12) const;  // Hermitian, trace 1, PSD
};

// rho_S = Tr_E |psi><psi|; entries <E_j|E_i>.
ReducedState reduce(const JointState& psi);

struct DriftResult {
  Eigen::Vector2d initial_diag;
  Eigen::Vector2d final_diag;
  double drift = 0.0;
};

DriftResult diagonal_drift(const BlockUnitary& u, const JointState& psi0);

// eps (4 + 4 eps + 8 sqrt(1 + eps)).
double drift_bound(double eps);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  // Certified construction distances.
  double max_unitary_gap = 0.0;
  double max_record_gap = 0.0;
};

/// Builds U_1, U_2 (block diagonal, so U_i(m_i r_i) = m_i E_i) and U_phi
/// pairwise within eps2, records r_1, r_2, r_phi pairwise within eps1, and
/// evaluates || U_phi(phi r_phi) - (m_1 E_1 + m_2 E_2)/sqrt2 || against
/// sqrt2 (eps1 + eps2). eps1 = eps2 = 0 is the vacuous equality case.
BoundCheck counterfactual_bound_check(std::size_t d, double eps1, double eps2, std::uint64_t seed);

struct AdversarialResult {
  double worst_ratio = 0.0;  // max lhs / rhs over the scan
  double theta = 0.0, beta = 0.0, phase = 0.0;
};

// Aligns the unitary and record perturbations along a common direction and
// scans their relative phase and magnitudes up to the constraint boundary.
AdversarialResult counterfactual_adversarial(std::size_t d, double eps1, double eps2, std::uint64_t seed,
                                             std::size_t steps = 64);

struct OrthoResult {
  double worst_distance = 0.0;  // min ||A - B|| over samples
  double bound = 0.0;           // sqrt(2 - 2 eps)
  double eta = 0.0;             // sqrt2 - bound
  bool all_above = false;
};

OrthoResult almost_ortho_check(double epsilon, std::size_t trials, std::uint64_t seed, std::size_t dim = 16);

struct Packets {
  double center_plus;
  double center_minus;
  double sigma;  // standard deviation of |psi|^2
};

struct Slit {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct SternGerlachResult {
  ReducedState state;      // renormalized to trace 1
  Eigen::Matrix2cd raw;    // slit-restricted integrals as printed
  double captured = 0.0;   // trace of raw
};

/// Gaussian packets psi_pm with |psi_pm|^2 normal (center_pm, sigma^2);
/// integrals by adaptive Gauss-Kronrod quadrature.
SternGerlachResult stern_gerlach_density(cplx alpha, cplx beta, const Packets& packets, const Slit& slit);

}  // namespace flea::toy
