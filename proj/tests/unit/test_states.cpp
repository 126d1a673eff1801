#include <doctest.h>

#include <cmath>
#include <complex>

#include "homtest/rng.hpp"
#include "homtest/states.hpp"

using namespace homtest;

namespace {

ComplexVector ket(std::initializer_list<std::complex<double>> a) {
  ComplexVector v(static_cast<int>(a.size()));
  int i = 0;
  for (const auto& x : a) v(i++) = x;
  v.normalize();
  return v;
}

// Spectral-decomposition route for the trace product, independent of the
// direct matrix multiplication.
double trace_product_eigen_oracle(const DensityMatrix& r1,
                                  const DensityMatrix& r2) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> e1(r1.matrix());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> e2(r2.matrix());
  double sum = 0.0;
  for (int k = 0; k < r1.dim(); ++k) {
    for (int l = 0; l < r2.dim(); ++l) {
      const std::complex<double> ov =
          e1.eigenvectors().col(k).dot(e2.eigenvectors().col(l));
      sum += e1.eigenvalues()(k) * e2.eigenvalues()(l) * std::norm(ov);
    }
  }
  return sum;
}

}  // namespace

TEST_CASE("density matrix validation rejects bad inputs") {
  ComplexMatrix bad_trace = ComplexMatrix::Identity(2, 2);
  CHECK_THROWS(DensityMatrix(bad_trace));

  ComplexMatrix non_hermitian(2, 2);
  non_hermitian << 0.5, std::complex<double>(0.1, 0.2), 0.4, 0.5;
  CHECK_THROWS(DensityMatrix(non_hermitian));

  ComplexMatrix negative(2, 2);
  negative << 1.2, 0.0, 0.0, -0.2;
  CHECK_THROWS(DensityMatrix(negative));

  CHECK_THROWS(DensityMatrix::maximally_mixed(33));
}

TEST_CASE("swap test basics") {
  const PureState zero(ket({1, 0}));
  const PureState one(ket({0, 1}));
  const PureState plus(ket({1, 1}));

  {
    const auto [p0, p1] = swap_test_probs(zero, zero);
    CHECK(p0 == doctest::Approx(1.0));
    CHECK(p1 == doctest::Approx(0.0));
  }
  {
    const auto [p0, p1] = swap_test_probs(zero, one);
    CHECK(p0 == doctest::Approx(0.5));
    CHECK(p1 == doctest::Approx(0.5));
  }
  {
    const auto [p0, p1] = simulate_cswap(plus, zero);
    CHECK(p0 == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(p1 == doctest::Approx(0.25).epsilon(1e-12));
  }
  {
    const auto [p0, p1] = simulate_cswap(zero, zero);
    CHECK(p0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p1 == doctest::Approx(0.0).epsilon(1e-12));
  }
  {
    const auto [p0, p1] = simulate_cswap(zero, one);
    CHECK(p0 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p1 == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK_THROWS(swap_test_probs(zero, PureState(ket({1, 0, 0}))));
}

TEST_CASE("circuit simulation agrees with the closed form on random pairs") {
  RandomStream rng(7);
  for (int d : {2, 3, 4}) {
    for (int i = 0; i < 100; ++i) {
      const PureState a = random_pure_state(d, rng);
      const PureState b = random_pure_state(d, rng);
      const auto closed = swap_test_probs(a, b);
      const auto circuit = simulate_cswap(a, b);
      CHECK(closed.first == doctest::Approx(circuit.first).epsilon(1e-12));
      CHECK(closed.second == doctest::Approx(circuit.second).epsilon(1e-12));
    }
  }
  // Register dimension above the circuit cap.
  RandomStream r2(8);
  const PureState big_a = random_pure_state(12, r2);
  const PureState big_b = random_pure_state(12, r2);
  CHECK_THROWS(simulate_cswap(big_a, big_b));
}

TEST_CASE("trace product") {
  const auto mixed2 = DensityMatrix::maximally_mixed(2);
  CHECK(trace_product(mixed2, mixed2) == doctest::Approx(0.5).epsilon(1e-12));

  RandomStream rng(15);
  for (int i = 0; i < 50; ++i) {
    const PureState a = random_pure_state(3, rng);
    const PureState b = random_pure_state(3, rng);
    const double overlap_sq = std::norm(a.vector().dot(b.vector()));
    CHECK(trace_product(DensityMatrix::pure(a.vector()),
                        DensityMatrix::pure(b.vector())) ==
          doctest::Approx(overlap_sq).epsilon(1e-10));
  }
  for (int i = 0; i < 100; ++i) {
    const auto r1 = random_density_matrix(4, rng);
    const auto r2 = random_density_matrix(4, rng);
    CHECK(trace_product(r1, r2) ==
          doctest::Approx(trace_product_eigen_oracle(r1, r2)).epsilon(1e-10));
  }
}

TEST_CASE("linear entropy") {
  RandomStream rng(21);
  const PureState a = random_pure_state(4, rng);
  CHECK(linear_entropy(DensityMatrix::pure(a.vector())) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(linear_entropy(DensityMatrix::maximally_mixed(4)) ==
        doctest::Approx(0.75).epsilon(1e-12));
  ComplexMatrix diag = ComplexMatrix::Zero(2, 2);
  diag(0, 0) = 0.9;
  diag(1, 1) = 0.1;
  CHECK(linear_entropy(DensityMatrix(diag)) == doctest::Approx(0.18).epsilon(1e-12));
}

TEST_CASE("fidelity bounds bracket the uhlmann fidelity") {
  RandomStream rng(33);
  SUBCASE("pure states saturate both bounds") {
    for (int i = 0; i < 50; ++i) {
      const auto a = DensityMatrix::pure(random_pure_state(4, rng).vector());
      const auto b = DensityMatrix::pure(random_pure_state(4, rng).vector());
      const auto [lo, hi] = fidelity_bounds(a, b);
      const double f2 = std::pow(uhlmann_fidelity(a, b), 2);
      CHECK(lo == doctest::Approx(f2).epsilon(1e-9));
      CHECK(hi == doctest::Approx(f2).epsilon(1e-9));
    }
  }
  SUBCASE("identical maximally mixed states bracket unity") {
    const auto m = DensityMatrix::maximally_mixed(2);
    const auto [lo, hi] = fidelity_bounds(m, m);
    CHECK(lo <= 1.0);
    CHECK(hi >= 1.0 - 1e-12);
  }
  SUBCASE("random pairs") {
    for (int d : {2, 4, 8}) {
      for (int i = 0; i < 350; ++i) {
        const auto r1 = random_density_matrix(d, rng);
        const auto r2 = random_density_matrix(d, rng);
        const auto [lo, hi] = fidelity_bounds(r1, r2);
        const double f2 = std::pow(uhlmann_fidelity(r1, r2), 2);
        CHECK(lo <= f2 + 1e-10);
        CHECK(hi >= f2 - 1e-10);
      }
    }
  }
}

TEST_CASE("modulated trace product") {
  RandomStream rng(41);
  SUBCASE("identical modulation cancels") {
    for (int i = 0; i < 50; ++i) {
      const auto u = random_unitary(4, rng);
      const auto r1 = random_density_matrix(4, rng);
      const auto r2 = random_density_matrix(4, rng);
      CHECK(modulated_trace_product(u, u, r1, r2) ==
            doctest::Approx(trace_product(r1, r2)).epsilon(1e-10));
    }
  }
  SUBCASE("cyclic reduction to a single unitary") {
    for (int i = 0; i < 50; ++i) {
      const auto u1 = random_unitary(3, rng);
      const auto u2 = random_unitary(3, rng);
      const auto r1 = random_density_matrix(3, rng);
      const auto r2 = random_density_matrix(3, rng);
      const UnitaryMatrix u(u2.matrix().adjoint() * u1.matrix());
      const UnitaryMatrix id(ComplexMatrix::Identity(3, 3));
      CHECK(modulated_trace_product(u1, u2, r1, r2) ==
            doctest::Approx(modulated_trace_product(u, id, r1, r2))
                .epsilon(1e-10));
    }
  }
  SUBCASE("identically sourced states never gain purity under modulation") {
    for (int d : {2, 4, 8}) {
      for (int i = 0; i < 350; ++i) {
        const auto rho = random_density_matrix(d, rng);
        const auto u = random_unitary(d, rng);
        const UnitaryMatrix id(ComplexMatrix::Identity(d, d));
        const double modulated = modulated_trace_product(u, id, rho, rho);
        CHECK(modulated <= trace_product(rho, rho) + 1e-10);
      }
    }
  }
  SUBCASE("pure identical states with identity modulation give unity") {
    const auto rho = DensityMatrix::pure(ket({1, 0}));
    const UnitaryMatrix id(ComplexMatrix::Identity(2, 2));
    CHECK(modulated_trace_product(id, id, rho, rho) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("distinct states admit overlap-increasing modulation") {
    // A rotation aligning mismatched eigenbases raises the trace product, so
    // the one-sided inequality only holds for identically sourced states.
    ComplexMatrix z = ComplexMatrix::Zero(2, 2);
    z(0, 0) = 1.0;
    const auto rho_z = DensityMatrix(z);
    const auto rho_x = DensityMatrix::pure(ket({1, 1}));
    ComplexMatrix h(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    h << s, s, s, -s;
    const UnitaryMatrix had(h);
    const UnitaryMatrix id(ComplexMatrix::Identity(2, 2));
    const double base = trace_product(rho_z, rho_x);
    const double rotated = modulated_trace_product(had, id, rho_z, rho_x);
    CHECK(base == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rotated == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rotated > base);
  }
}

TEST_CASE("tensor embedding") {
  RandomStream rng(55);
  SUBCASE("pure times pure stays pure") {
    const auto s = DensityMatrix::pure(random_pure_state(2, rng).vector());
    const auto o = DensityMatrix::pure(random_pure_state(3, rng).vector());
    const auto joint = tensor_embed(s, o);
    CHECK(linear_entropy(joint) == doctest::Approx(0.0).epsilon(1e-10));
  }
  SUBCASE("trace product factorizes") {
    for (int i = 0; i < 100; ++i) {
      const auto s1 = random_density_matrix(2, rng);
      const auto s2 = random_density_matrix(2, rng);
      const auto o1 = random_density_matrix(3, rng);
      const auto o2 = random_density_matrix(3, rng);
      const double joint = trace_product(tensor_embed(s1, o1), tensor_embed(s2, o2));
      CHECK(joint == doctest::Approx(trace_product(s1, s2) *
                                     trace_product(o1, o2))
                          .epsilon(1e-10));
    }
  }
  SUBCASE("time-bin projection hides the encoded basis") {
    // Projecting the signal qubit onto one bin keeps the same weight and the
    // same post-projection joint state for both conjugate-basis inputs.
    const auto other = random_density_matrix(2, rng);
    const auto x0 = DensityMatrix::pure(ket({1, 1}));
    const auto x1 = DensityMatrix::pure(ket({1, -1}));
    ComplexMatrix proj = ComplexMatrix::Zero(2, 2);
    proj(0, 0) = 1.0;
    ComplexMatrix proj_joint = ComplexMatrix::Zero(4, 4);
    proj_joint.block(0, 0, 2, 2) = ComplexMatrix::Identity(2, 2);
    const auto project = [&](const DensityMatrix& sig) {
      const ComplexMatrix j = tensor_embed(sig, other).matrix();
      return ComplexMatrix(proj_joint * j * proj_joint);
    };
    const ComplexMatrix a = project(x0);
    const ComplexMatrix b = project(x1);
    CHECK(a.trace().real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(b.trace().real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK((a - b).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
}
