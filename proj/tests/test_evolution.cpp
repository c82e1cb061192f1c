#include <catch2/catch.hpp>

#include "spinchain/evolution.hpp"
#include "spinchain/initial_state.hpp"
#include "test_support.hpp"

using namespace spinchain;

TEST_CASE("diagonalize handles degenerate and diagonal input", "[evolution]") {
  const Propagator zero = Propagator::diagonalize(Matrix::Zero(4, 4));
  REQUIRE(zero.eigenvalues().cwiseAbs().maxCoeff() == 0.0);

  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  d(2, 2) = 3.0;
  const Propagator p = Propagator::diagonalize(d);
  REQUIRE(p.eigenvalues()(0) == Approx(1.0));
  REQUIRE(p.eigenvalues()(2) == Approx(3.0));
}

TEST_CASE("diagonalize meets the reconstruction contract", "[evolution]") {
  auto rng = testsup::make_rng(41);
  const Matrix h = testsup::random_hermitian(rng, 64);
  const Propagator p = Propagator::diagonalize(h);
  const Matrix recon =
      p.eigenvectors() * p.eigenvalues().asDiagonal() * p.eigenvectors().adjoint();
  REQUIRE((recon - h).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("diagonalize rejects non-Hermitian input with the deviation", "[evolution]") {
  Matrix h = Matrix::Identity(2, 2);
  h(0, 1) = Complex{0.0, 0.5};
  REQUIRE_THROWS_WITH(Propagator::diagonalize(h), Catch::Contains("not Hermitian"));
}

TEST_CASE("unitary properties of the propagator", "[evolution]") {
  auto rng = testsup::make_rng(42);
  const Matrix h = build_xy_hamiltonian(ChainSpec(4));
  const Propagator p = Propagator::diagonalize(h);

  REQUIRE((p.unitary_at(0.0) - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-14);

  for (int trial = 0; trial < 50; ++trial) {
    const double t = 100.0 * testsup::uniform(rng);
    const Matrix u = p.unitary_at(t);
    REQUIRE((u.adjoint() * u - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
  }

  const double t1 = 3.7, t2 = -1.2;
  REQUIRE((p.unitary_at(t1) * p.unitary_at(t2) - p.unitary_at(t1 + t2))
              .cwiseAbs()
              .maxCoeff() < 1e-12);

  REQUIRE_THROWS_AS(p.unitary_at(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("three-site transfer amplitude has the closed form", "[evolution]") {
  const Propagator p = Propagator::diagonalize(build_xy_hamiltonian(ChainSpec(3)));
  for (double t : {0.3, 1.0, 2.2214414690791831, 4.0, 7.77}) {
    const Matrix u = p.unitary_at(t);
    const Complex amp = u(4, 1);  // <100|U|001>
    const double s = std::sin(t / (2.0 * std::sqrt(2.0)));
    REQUIRE(amp.real() == Approx(-s * s).margin(1e-12));
    REQUIRE(amp.imag() == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("evolution preserves trace and spectrum", "[evolution]") {
  auto rng = testsup::make_rng(43);
  const Matrix h = build_xy_hamiltonian(ChainSpec(3));
  const Propagator p = Propagator::diagonalize(h);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix rho = testsup::random_density(rng, 8);
    const double t = 40.0 * testsup::uniform_pm1(rng);
    const DensityMatrix evolved = p.evolve(rho, t);
    REQUIRE(std::abs(evolved.data().trace() - Complex{1.0, 0.0}) < 1e-13);

    Eigen::SelfAdjointEigenSolver<Matrix> before(rho.data(), Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Matrix> after(evolved.data(), Eigen::EigenvaluesOnly);
    REQUIRE((before.eigenvalues() - after.eigenvalues()).cwiseAbs().maxCoeff() < 1e-11);
  }
  const DensityMatrix rho = testsup::random_density(rng, 8);
  REQUIRE((p.evolve(rho, 0.0).data() - rho.data()).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE_THROWS_AS(p.evolve(testsup::random_density(rng, 4), 1.0), std::invalid_argument);
}

TEST_CASE("probe-mode matrices flow through the evolution", "[evolution]") {
  const Matrix h = build_xy_hamiltonian(ChainSpec(2));
  const Propagator p = Propagator::diagonalize(h);
  const Matrix probe0 = tensor_product(matrix_unit(0, 1), Matrix::Identity(2, 2) / 2.0);
  const DensityMatrix evolved = p.evolve(DensityMatrix::probe(probe0), 1.3);
  REQUIRE(evolved.mode() == StateMode::probe);
  const Matrix u = p.unitary_at(1.3);
  REQUIRE((evolved.data() - u * probe0 * u.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("magnetization expectation is conserved", "[evolution]") {
  auto rng = testsup::make_rng(44);
  ChainSpec spec(4);
  const Matrix mz = total_magnetization(spec);
  const Propagator p = Propagator::diagonalize(build_xy_hamiltonian(spec));
  const DensityMatrix rho = testsup::random_density(rng, 16);
  const double before = (rho.data() * mz).trace().real();
  for (double t : {0.9, 5.5, 31.0}) {
    const double after = (p.evolve(rho, t).data() * mz).trace().real();
    REQUIRE(after == Approx(before).margin(1e-12));
  }
}

TEST_CASE("receiver state at t = 0 is the rest reduction", "[evolution]") {
  ChainSpec spec(4);
  spec.beta = 0.9;
  const DensityMatrix rest = rest_state(spec, RestStateKind::thermal(0.9));
  const Propagator p = Propagator::diagonalize(build_xy_hamiltonian(spec));
  const DensityMatrix r0 = receiver_state(spec, {0.3, 0.1, -0.2}, rest, p, 0.0);
  // the receiver is the last site of the rest register (sites 2..4 -> site 3)
  const DensityMatrix expected = partial_trace(rest, {3});
  REQUIRE((r0.data() - expected.data()).cwiseAbs().maxCoeff() < 1e-13);
  REQUIRE(std::abs(r0.data().trace() - Complex{1.0, 0.0}) < 1e-13);
}

TEST_CASE("full excitation arrival on the three-site chain", "[evolution]") {
  ChainSpec spec(3);
  const DensityMatrix rest = rest_state(spec, RestStateKind::ground());
  const Propagator p = Propagator::diagonalize(build_xy_hamiltonian(spec));
  const double t = std::sqrt(2.0) * M_PI;
  const DensityMatrix r = receiver_state(spec, {0.0, 0.0, 0.0}, rest, p, t);
  Matrix expected = Matrix::Zero(2, 2);
  expected(1, 1) = 1.0;
  REQUIRE((r.data() - expected).cwiseAbs().maxCoeff() < 1e-10);
}
