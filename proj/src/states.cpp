#include "homtest/states.hpp"

#include <cmath>
#include <stdexcept>

namespace homtest {

namespace {

constexpr double kHermTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kEigTol = -1e-10;
constexpr double kUnitaryTol = 1e-12;

void check_dim(int d, int cap, const char* what) {
  if (d < 1 || d > cap) {
    throw std::invalid_argument(std::string(what) + ": dimension out of range");
  }
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw std::invalid_argument("DensityMatrix: matrix must be square");
  }
  check_dim(dim(), kMaxStateDim, "DensityMatrix");
  if ((m_ - m_.adjoint()).norm() > kHermTol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  }
  if (std::abs(m_.trace().real() - 1.0) > kTraceTol ||
      std::abs(m_.trace().imag()) > kTraceTol) {
    throw std::invalid_argument("DensityMatrix: trace must be 1");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < kEigTol) {
    throw std::invalid_argument("DensityMatrix: not positive semidefinite");
  }
}

DensityMatrix DensityMatrix::pure(const ComplexVector& state) {
  PureState s(state);
  return DensityMatrix(s.vector() * s.vector().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  check_dim(dim, kMaxStateDim, "DensityMatrix");
  return DensityMatrix(ComplexMatrix::Identity(dim, dim) / double(dim));
}

PureState::PureState(ComplexVector v) : v_(std::move(v)) {
  check_dim(dim(), kMaxStateDim, "PureState");
  if (std::abs(v_.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("PureState: vector must have unit norm");
  }
}

UnitaryMatrix::UnitaryMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw std::invalid_argument("UnitaryMatrix: matrix must be square");
  }
  check_dim(dim(), kMaxStateDim, "UnitaryMatrix");
  const ComplexMatrix gram = m_.adjoint() * m_;
  if ((gram - ComplexMatrix::Identity(dim(), dim())).norm() > kUnitaryTol * dim()) {
    throw std::invalid_argument("UnitaryMatrix: U^dag U != I");
  }
}

std::pair<double, double> swap_test_probs(const PureState& phi,
                                          const PureState& psi) {
  if (phi.dim() != psi.dim()) {
    throw std::invalid_argument("swap_test_probs: dimension mismatch");
  }
  const std::complex<double> overlap = phi.vector().dot(psi.vector());
  const double overlap_sq = std::norm(overlap);
  return {0.5 * (1.0 + overlap_sq), 0.5 * (1.0 - overlap_sq)};
}

std::pair<double, double> simulate_cswap(const PureState& phi,
                                         const PureState& psi) {
  if (phi.dim() != psi.dim()) {
    throw std::invalid_argument("simulate_cswap: dimension mismatch");
  }
  const int d = phi.dim();
  if (d > kMaxCswapDim) {
    throw std::invalid_argument("simulate_cswap: register dimension above cap");
  }
  const int reg = d * d;

  // State layout: control (slowest) x register1 x register2.
  ComplexVector state = ComplexVector::Zero(2 * reg);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      state(i * d + j) = phi.vector()(i) * psi.vector()(j);
    }
  }

  // First Hadamard on the control: |0>|phi psi> -> (|0> + |1>)|phi psi>/sqrt2.
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < reg; ++k) {
    state(reg + k) = state(k) * inv_sqrt2;
    state(k) *= inv_sqrt2;
  }

  // Controlled swap on the |1> branch.
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      std::swap(state(reg + i * d + j), state(reg + j * d + i));
    }
  }

  // Second Hadamard on the control.
  ComplexVector out(2 * reg);
  for (int k = 0; k < reg; ++k) {
    out(k) = inv_sqrt2 * (state(k) + state(reg + k));
    out(reg + k) = inv_sqrt2 * (state(k) - state(reg + k));
  }

  double p0 = 0.0;
  for (int k = 0; k < reg; ++k) p0 += std::norm(out(k));
  double p1 = 0.0;
  for (int k = 0; k < reg; ++k) p1 += std::norm(out(reg + k));
  return {p0, p1};
}

double trace_product(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dim() != rho2.dim()) {
    throw std::invalid_argument("trace_product: dimension mismatch");
  }
  return (rho1.matrix() * rho2.matrix()).trace().real();
}

double linear_entropy(const DensityMatrix& rho) {
  return 1.0 - (rho.matrix() * rho.matrix()).trace().real();
}

std::pair<double, double> fidelity_bounds(const DensityMatrix& rho1,
                                          const DensityMatrix& rho2) {
  const double tp = trace_product(rho1, rho2);
  const double s1 = std::max(0.0, linear_entropy(rho1));
  const double s2 = std::max(0.0, linear_entropy(rho2));
  return {tp, tp + std::sqrt(s1 * s2)};
}

double uhlmann_fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dim() != rho2.dim()) {
    throw std::invalid_argument("uhlmann_fidelity: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es1(rho1.matrix());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es2(rho2.matrix());
  const ComplexMatrix sqrt1 =
      es1.eigenvectors() *
      es1.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      es1.eigenvectors().adjoint();
  const ComplexMatrix sqrt2 =
      es2.eigenvectors() *
      es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      es2.eigenvectors().adjoint();
  // F = sum of singular values of sqrt(rho1) sqrt(rho2).
  Eigen::JacobiSVD<ComplexMatrix> svd(sqrt1 * sqrt2);
  return svd.singularValues().sum();
}

double modulated_trace_product(const UnitaryMatrix& u1, const UnitaryMatrix& u2,
                               const DensityMatrix& rho1,
                               const DensityMatrix& rho2) {
  if (u1.dim() != rho1.dim() || u2.dim() != rho2.dim() ||
      rho1.dim() != rho2.dim()) {
    throw std::invalid_argument("modulated_trace_product: dimension mismatch");
  }
  const ComplexMatrix m1 = u1.matrix() * rho1.matrix() * u1.matrix().adjoint();
  const ComplexMatrix m2 = u2.matrix() * rho2.matrix() * u2.matrix().adjoint();
  return (m1 * m2).trace().real();
}

DensityMatrix tensor_embed(const DensityMatrix& signal,
                           const DensityMatrix& other) {
  const int ds = signal.dim();
  const int dn = other.dim();
  if (ds * dn > kMaxStateDim) {
    throw std::invalid_argument("tensor_embed: product dimension above cap");
  }
  ComplexMatrix out(ds * dn, ds * dn);
  for (int i = 0; i < ds; ++i) {
    for (int j = 0; j < ds; ++j) {
      out.block(i * dn, j * dn, dn, dn) = signal.matrix()(i, j) * other.matrix();
    }
  }
  return DensityMatrix(out);
}

DensityMatrix random_density_matrix(int dim, RandomStream& rng) {
  check_dim(dim, kMaxStateDim, "random_density_matrix");
  ComplexMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      g(i, j) = std::complex<double>(rng.gaussian(), rng.gaussian());
    }
  }
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace();
  // Symmetrize away the roundoff so the validating constructor accepts it.
  m = 0.5 * (m + ComplexMatrix(m.adjoint()));
  return DensityMatrix(m);
}

PureState random_pure_state(int dim, RandomStream& rng) {
  check_dim(dim, kMaxStateDim, "random_pure_state");
  ComplexVector v(dim);
  for (int i = 0; i < dim; ++i) {
    v(i) = std::complex<double>(rng.gaussian(), rng.gaussian());
  }
  v.normalize();
  return PureState(v);
}

UnitaryMatrix random_unitary(int dim, RandomStream& rng) {
  check_dim(dim, kMaxStateDim, "random_unitary");
  ComplexMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      g(i, j) = std::complex<double>(rng.gaussian(), rng.gaussian());
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  // Fix the phases so the distribution does not depend on the QR convention.
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    const std::complex<double> rii = r(i, i);
    const double mag = std::abs(rii);
    if (mag > 0.0) q.col(i) *= rii / mag;
  }
  return UnitaryMatrix(q);
}

}  // namespace homtest
