#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>

#include "homtest/rng.hpp"

namespace homtest {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr int kMaxStateDim = 32;
inline constexpr int kMaxCswapDim = 8;

// Finite-dimensional density operator. Construction validates hermiticity,
// unit trace, and positive semidefiniteness (inputs failing the checks are
// rejected, not clipped).
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);

  const ComplexMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  static DensityMatrix pure(const ComplexVector& state);
  static DensityMatrix maximally_mixed(int dim);

 private:
  ComplexMatrix m_;
};

// Unit-norm complex vector.
class PureState {
 public:
  explicit PureState(ComplexVector v);

  const ComplexVector& vector() const { return v_; }
  int dim() const { return static_cast<int>(v_.rows()); }

 private:
  ComplexVector v_;
};

class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(ComplexMatrix m);

  const ComplexMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  ComplexMatrix m_;
};

// Swap-test outcome probabilities ((1 +- overlap^2) / 2) from the overlap.
std::pair<double, double> swap_test_probs(const PureState& phi,
                                          const PureState& psi);

// Same outcome probabilities obtained by building the full control + two
// register state, applying Hadamard / controlled-swap / Hadamard explicitly,
// and measuring the control. Serves as an independent circuit-level check.
std::pair<double, double> simulate_cswap(const PureState& phi,
                                         const PureState& psi);

double trace_product(const DensityMatrix& rho1, const DensityMatrix& rho2);

// 1 - Tr(rho^2), in [0, 1 - 1/d].
double linear_entropy(const DensityMatrix& rho);

// Lower and upper bounds on the squared fidelity from the trace product and
// the linear entropies. Equal when both states are pure.
std::pair<double, double> fidelity_bounds(const DensityMatrix& rho1,
                                          const DensityMatrix& rho2);

// Uhlmann fidelity Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)), via eigensolves.
double uhlmann_fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2);

// Trace product after applying per-state modulation unitaries.
double modulated_trace_product(const UnitaryMatrix& u1, const UnitaryMatrix& u2,
                               const DensityMatrix& rho1,
                               const DensityMatrix& rho2);

// Tensor product signal (x) other.
DensityMatrix tensor_embed(const DensityMatrix& signal,
                           const DensityMatrix& other);

// Random states for property tests: Ginibre-construction density matrices and
// Haar-ish unitaries from orthonormalized Ginibre matrices.
DensityMatrix random_density_matrix(int dim, RandomStream& rng);
PureState random_pure_state(int dim, RandomStream& rng);
UnitaryMatrix random_unitary(int dim, RandomStream& rng);

}  // namespace homtest
