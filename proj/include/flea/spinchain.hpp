#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace flea::spin {

enum class Variant { AsPrinted, TransverseField };
enum class Boundary { Open, Ring };

/// H = -sum_bonds sz_i sz_{i+1} - B sum_i s_i with s = sz (AsPrinted) or
/// s = sx (TransverseField). Basis index bit i set means site i is down.
struct ChainSpec {
  int N = 2;
  double B = 0.0;
  Variant variant = Variant::AsPrinted;
  Boundary boundary = Boundary::Open;

  void validate() const;  // 2 <= N <= 14
  std::size_t dim() const { return std::size_t{1} << N; }
};

// eps added to a single diagonal entry of the sz product basis.
struct SpinFlea {
  std::uint64_t basis_index = 0;
  double epsilon = 0.0;
};

// Index of the all-up and all-down product states.
inline std::uint64_t all_up_index() { return 0; }
inline std::uint64_t all_down_index(int N) { return (std::uint64_t{1} << N) - 1; }

// Diagonal of H in the sz basis (the full matrix for AsPrinted).
std::vector<double> diagonal_energies(const ChainSpec& spec, const std::optional<SpinFlea>& flea);

// y = H x, matrix-free; blocks of basis states are split across workers.
void apply_hamiltonian(const ChainSpec& spec, const std::optional<SpinFlea>& flea, const std::vector<double>& x,
                       std::vector<double>& y, std::size_t workers = 1);

// Sorted spectrum of the diagonal variant by enumeration; DomainError otherwise.
std::vector<double> enumerate_spectrum(const ChainSpec& spec, const std::optional<SpinFlea>& flea);

struct ChainAnalysis {
  std::vector<double> energies;                 // k lowest, ascending
  std::vector<std::vector<double>> states;      // normalized, real
  // sector_weights[n][d]: weight of state n with d spins down (M = N - 2d).
  std::vector<std::vector<double>> sector_weights;
  double splitting = 0.0;     // E_1 - E_0
  double polarization = 0.0;  // |<M>| / N in the ground state
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  double worst_residual = 0.0;
};

inline constexpr double kLanczosTol = 1e-10;

/// k lowest eigenpairs by Lanczos with full reorthogonalization, one pair at a
/// time with deflation against the converged ones. Throws ConvergenceError
/// when a pair misses tol * ||H|| after the restart budget.
ChainAnalysis chain_ground_analysis(const ChainSpec& spec, const std::optional<SpinFlea>& flea, std::size_t k,
                                    std::size_t workers = 1, double tol = kLanczosTol, std::uint64_t seed = 7);

}  // namespace flea::spin
