#include "flea/toy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "flea/errors.hpp"

namespace flea::toy {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

CMat ginibre(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::numbers::sqrt2 / 2.0);
  CMat z(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = cplx(g(rng), g(rng));
  }
  return z;
}

CVec random_unit(std::size_t n, std::mt19937_64& rng) {
  CVec v = ginibre(n, 1, rng).col(0);
  return v / v.norm();
}

double op_norm(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues()(0);
}

// exp(i theta K) for Hermitian K.
CMat expi(double theta, const CMat& k) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(k);
  const auto& v = eig.eigenvectors();
  CVec ph(k.rows());
  for (Eigen::Index i = 0; i < k.rows(); ++i) ph(i) = std::polar(1.0, theta * eig.eigenvalues()(i));
  return v * ph.asDiagonal() * v.adjoint();
}

CMat random_hermitian(std::size_t n, std::mt19937_64& rng) {
  const CMat g = ginibre(n, n, rng);
  CMat h = 0.5 * (g + g.adjoint());
  return h / op_norm(h);
}

CMat block_diag(const CMat& a, const CMat& b) {
  const Eigen::Index d = a.rows();
  CMat u = CMat::Zero(2 * d, 2 * d);
  u.topLeftCorner(d, d) = a;
  u.bottomRightCorner(d, d) = b;
  return u;
}

CVec kron(int i, const CVec& e) {
  const Eigen::Index d = e.size();
  CVec v = CVec::Zero(2 * d);
  v.segment(i * d, d) = e;
  return v;
}

}  // namespace

CVec JointState::flat() const {
  const Eigen::Index d = amp.cols();
  CVec v(2 * d);
  v.head(d) = amp.row(0).transpose();
  v.tail(d) = amp.row(1).transpose();
  return v;
}

JointState JointState::from_flat(const CVec& v) {
  const Eigen::Index d = v.size() / 2;
  JointState s;
  s.amp.resize(2, d);
  s.amp.row(0) = v.head(d).transpose();
  s.amp.row(1) = v.tail(d).transpose();
  return s;
}

JointState JointState::random(std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return from_flat(random_unit(2 * d, rng));
}

JointState JointState::product(int i, const CVec& e) {
  if (i != 0 && i != 1) throw DomainError("pointer index must be 0 or 1");
  return from_flat(kron(i, e / e.norm()));
}

JointState SchmidtData::recompose() const {
  JointState s;
  s.amp = c1 * system.col(0) * environment.col(0).transpose() + c2 * system.col(1) * environment.col(1).transpose();
  return s;
}

SchmidtData schmidt_decompose(const JointState& psi) {
  Eigen::JacobiSVD<CMat> svd(CMat(psi.amp), Eigen::ComputeFullU | Eigen::ComputeThinV);
  SchmidtData out;
  out.c1 = svd.singularValues()(0);
  out.c2 = svd.singularValues().size() > 1 ? svd.singularValues()(1) : 0.0;
  out.system = svd.matrixU();
  // psi = U S V^dagger, so the environment factors are conj(V) columns.
  out.environment = svd.matrixV().conjugate();
  if (out.environment.cols() < 2) {
    CMat e = CMat::Zero(out.environment.rows(), 2);
    e.leftCols(out.environment.cols()) = out.environment;
    out.environment = e;
  }
  return out;
}

CMat BlockUnitary::assembled() const {
  const Eigen::Index n = static_cast<Eigen::Index>(d);
  CMat u(2 * n, 2 * n);
  u << U11, U12, U21, U22;
  return u;
}

double BlockUnitary::unitarity_error() const {
  const CMat u = assembled();
  return (u.adjoint() * u - CMat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

double BlockUnitary::diagonal_defect() const {
  const auto n = static_cast<Eigen::Index>(d);
  const CMat id = CMat::Identity(n, n);
  return std::max(op_norm(U11.adjoint() * U11 - id), op_norm(U22.adjoint() * U22 - id));
}

JointState BlockUnitary::apply(const JointState& psi) const {
  if (psi.env_dim() != d) throw DomainError("environment dimension mismatch");
  JointState out;
  out.amp.resize(2, static_cast<Eigen::Index>(d));
  out.amp.row(0) = (U11 * psi.amp.row(0).transpose() + U12 * psi.amp.row(1).transpose()).transpose();
  out.amp.row(1) = (U21 * psi.amp.row(0).transpose() + U22 * psi.amp.row(1).transpose()).transpose();
  return out;
}

CMat haar_unitary(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const CMat z = ginibre(n, n, rng);
  Eigen::HouseholderQR<CMat> qr(z);
  CMat q = qr.householderQ();
  const CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const cplx d = r(i, i);
    q.col(i) *= d / std::abs(d);
  }
  return q;
}

BlockUnitary make_block_unitary(std::size_t d, Flavor flavor, std::uint64_t seed) {
  if (d < 2) throw DomainError("environment dimension must be at least 2");
  const auto n = static_cast<Eigen::Index>(d);
  const CMat a1 = haar_unitary(d, mix_seed(seed, 0));
  const CMat a2 = haar_unitary(d, mix_seed(seed, 1));
  BlockUnitary u;
  u.d = d;
  u.flavor = flavor;
  if (flavor.kind == Flavor::Kind::Diagonal) {
    u.U11 = a1;
    u.U22 = a2;
    u.U12 = CMat::Zero(n, n);
    u.U21 = CMat::Zero(n, n);
    return u;
  }
  if (!(flavor.eps > 0 && flavor.eps < 1)) throw DomainError("almost-diagonal flavor needs 0 < eps < 1");
  std::mt19937_64 rng(mix_seed(seed, 2));
  CMat b = ginibre(d, d, rng);
  b /= op_norm(b);
  CMat k = CMat::Zero(2 * n, 2 * n);
  k.topRightCorner(n, n) = b;
  k.bottomLeftCorner(n, n) = b.adjoint();
  const CMat full = block_diag(a1, a2) * expi(flavor.eps, k);
  u.U11 = full.topLeftCorner(n, n);
  u.U12 = full.topRightCorner(n, n);
  u.U21 = full.bottomLeftCorner(n, n);
  u.U22 = full.bottomRightCorner(n, n);
  u.off_block_norm = std::max(op_norm(u.U12), op_norm(u.U21));
  if (u.off_block_norm > flavor.eps) {
    std::ostringstream os;
    os << "off-diagonal block norm " << u.off_block_norm << " exceeds eps = " << flavor.eps;
    throw ConstructionError(os.str());
  }
  return u;
}

void ReducedState::validate(double tol) const {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) throw DomainError("reduced state is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > tol) throw DomainError("reduced state trace differs from 1");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eig(rho);
  if (eig.eigenvalues().minCoeff() < -tol) throw DomainError("reduced state is not positive");
}

ReducedState reduce(const JointState& psi) { return {psi.amp * psi.amp.adjoint()}; }

DriftResult diagonal_drift(const BlockUnitary& u, const JointState& psi0) {
  const auto before = reduce(psi0).rho.diagonal().real();
  const auto after = reduce(u.apply(psi0)).rho.diagonal().real();
  return {before, after, (after - before).cwiseAbs().maxCoeff()};
}

double drift_bound(double eps) { return eps * (4.0 + 4.0 * eps + 8.0 * std::sqrt(1.0 + eps)); }

BoundCheck counterfactual_bound_check(std::size_t d, double eps1, double eps2, std::uint64_t seed) {
  if (d < 2) throw DomainError("environment dimension must be at least 2");
  if (eps1 < 0 || eps2 < 0) throw DomainError("eps1 and eps2 must be nonnegative");
  const auto n = static_cast<Eigen::Index>(d);
  std::mt19937_64 rng(mix_seed(seed, 3));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const CMat u0 = block_diag(haar_unitary(d, mix_seed(seed, 0)), haar_unitary(d, mix_seed(seed, 1)));
  // ||exp(i t K) - I|| <= t for ||K|| = 1, so each unitary sits within eps2 / 2 of u0.
  auto theta = [&] { return 0.5 * eps2 * unit(rng); };
  CMat u1 = u0, u2 = u0, uphi = u0;
  if (eps2 > 0) {
    u1 = u0 * expi(theta(), block_diag(random_hermitian(d, rng), CMat::Zero(n, n)));
    u2 = u0 * expi(theta(), block_diag(CMat::Zero(n, n), random_hermitian(d, rng)));
    uphi = u0 * expi(theta(), random_hermitian(2 * d, rng));
  }

  const CVec rphi = random_unit(d, rng);
  auto nearby = [&] {
    if (eps1 == 0) return CVec(rphi);
    const CVec dir = random_unit(d, rng);
    const CVec r = rphi + 0.45 * eps1 * unit(rng) * dir;
    return CVec(r / r.norm());
  };
  const CVec r1 = nearby(), r2 = nearby();

  BoundCheck out;
  out.max_unitary_gap = std::max({op_norm(uphi - u1), op_norm(uphi - u2), op_norm(u1 - u2)});
  out.max_record_gap = std::max({(rphi - r1).norm(), (rphi - r2).norm(), (r1 - r2).norm()});
  const bool vacuous = eps1 == 0 && eps2 == 0;
  if (!vacuous && (out.max_unitary_gap >= eps2 && eps2 > 0)) {
    throw ConstructionError("unitaries could not be certified within eps2");
  }
  if (!vacuous && (out.max_record_gap >= eps1 && eps1 > 0)) {
    throw ConstructionError("pointer records could not be certified within eps1");
  }

  const CVec out1 = u1 * kron(0, r1);
  const CVec out2 = u2 * kron(1, r2);
  const CVec e1 = out1.head(n), e2 = out2.tail(n);
  const CVec evolved = (uphi * kron(0, rphi) + uphi * kron(1, rphi)) / std::numbers::sqrt2;
  const CVec target = (kron(0, e1) + kron(1, e2)) / std::numbers::sqrt2;
  out.lhs = (evolved - target).norm();
  out.rhs = std::numbers::sqrt2 * (eps1 + eps2);
  out.holds = vacuous ? out.lhs <= out.rhs : out.lhs < out.rhs;
  return out;
}

AdversarialResult counterfactual_adversarial(std::size_t d, double eps1, double eps2, std::uint64_t seed,
                                             std::size_t steps) {
  if (!(eps1 > 0 && eps2 > 0 && eps1 < 2 && eps2 < 2)) throw DomainError("adversarial scan needs 0 < eps < 2");
  const auto n = static_cast<Eigen::Index>(d);
  std::mt19937_64 rng(mix_seed(seed, 4));
  const CMat u0 = block_diag(haar_unitary(d, mix_seed(seed, 0)), haar_unitary(d, mix_seed(seed, 1)));
  const CVec r = random_unit(d, rng);
  CVec s = random_unit(d, rng);
  s -= r * r.dot(s);
  s /= s.norm();
  // exp(i t K) rotates r towards -s; ||exp(i t K) - I|| = 2 sin(t / 2).
  const CMat k1 = cplx(0.0, 1.0) * (s * r.adjoint() - r * s.adjoint());
  const CMat k = block_diag(k1, k1);
  const double shrink = 1.0 - 1e-12;
  const double theta_max = 2.0 * std::asin(0.5 * eps2) * shrink;
  const double beta_max = 2.0 * std::asin(0.5 * eps1) * shrink;
  const CVec phi_r = (kron(0, r) + kron(1, r)) / std::numbers::sqrt2;
  const double rhs = std::numbers::sqrt2 * (eps1 + eps2);

  AdversarialResult best;
  const std::size_t mags = 8;
  for (std::size_t a = 1; a <= mags; ++a) {
    const double th = theta_max * static_cast<double>(a) / mags;
    const CMat uphi = u0 * expi(th, k);
    const CVec lhs_state = uphi * phi_r;
    for (std::size_t b = 1; b <= mags; ++b) {
      const double be = beta_max * static_cast<double>(b) / mags;
      for (std::size_t c = 0; c < steps; ++c) {
        const double ph = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(steps);
        const CVec ri = std::cos(be) * r - std::sin(be) * std::polar(1.0, ph) * s;
        const CVec e1 = (u0 * kron(0, ri)).head(n);
        const CVec e2 = (u0 * kron(1, ri)).tail(n);
        const CVec target = (kron(0, e1) + kron(1, e2)) / std::numbers::sqrt2;
        const double ratio = (lhs_state - target).norm() / rhs;
        if (ratio > best.worst_ratio) best = {ratio, th, be, ph};
      }
    }
  }
  return best;
}

OrthoResult almost_ortho_check(double epsilon, std::size_t trials, std::uint64_t seed, std::size_t dim) {
  if (!(epsilon >= 0 && epsilon <= 1)) throw DomainError("epsilon must lie in [0, 1]");
  if (dim < 2) throw DomainError("need at least two dimensions");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  OrthoResult out;
  out.bound = std::sqrt(2.0 - 2.0 * epsilon);
  out.eta = std::numbers::sqrt2 - out.bound;
  out.worst_distance = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    const CVec a = random_unit(dim, rng);
    CVec c = random_unit(dim, rng);
    c -= a * a.dot(c);
    c /= c.norm();
    // The first trial sits on the boundary |<A|B>| = eps with a real overlap.
    const double ov = t == 0 ? epsilon : epsilon * unit(rng);
    const double ph = t == 0 ? 0.0 : 2.0 * std::numbers::pi * unit(rng);
    const CVec b = ov * std::polar(1.0, ph) * a + std::sqrt(std::max(0.0, 1.0 - ov * ov)) * c;
    out.worst_distance = std::min(out.worst_distance, (a - b).norm());
  }
  out.all_above = out.worst_distance >= out.bound - 1e-12;
  return out;
}

SternGerlachResult stern_gerlach_density(cplx alpha, cplx beta, const Packets& pk, const Slit& slit) {
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-12) {
    throw DomainError("|alpha|^2 + |beta|^2 must equal 1");
  }
  if (!(pk.sigma > 0)) throw DomainError("packet width must be positive");
  if (!(slit.hi > slit.lo)) throw DomainError("slit interval is empty");
  const double amp = std::pow(2.0 * std::numbers::pi * pk.sigma * pk.sigma, -0.25);
  auto packet = [&](double c) {
    return [=](double x) {
      const double u = (x - c) / pk.sigma;
      return amp * std::exp(-0.25 * u * u);
    };
  };
  const auto plus = packet(pk.center_plus);
  const auto minus = packet(pk.center_minus);

  std::vector<double> cuts{slit.lo};
  for (double b : {std::min(pk.center_plus, pk.center_minus), 0.5 * (pk.center_plus + pk.center_minus),
                   std::max(pk.center_plus, pk.center_minus)}) {
    if (b > cuts.back() && b < slit.hi) cuts.push_back(b);
  }
  cuts.push_back(slit.hi);
  auto integrate = [&](auto f) {
    using boost::math::quadrature::gauss_kronrod;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      s += gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 20, 1e-15);
    }
    return s;
  };
  const double pp = integrate([&](double x) { return plus(x) * plus(x); });
  const double mm = integrate([&](double x) { return minus(x) * minus(x); });
  const double pm = integrate([&](double x) { return plus(x) * minus(x); });

  SternGerlachResult out;
  out.raw(0, 0) = std::norm(alpha) * pp;
  out.raw(1, 1) = std::norm(beta) * mm;
  out.raw(0, 1) = std::conj(alpha) * beta * pm;
  out.raw(1, 0) = alpha * std::conj(beta) * pm;
  out.captured = out.raw.trace().real();
  if (out.captured < 1e-12) throw DomainError("slit captures no probability mass; post-selection impossible");
  out.state.rho = out.raw / out.captured;
  return out;
}

}  // namespace flea::toy
