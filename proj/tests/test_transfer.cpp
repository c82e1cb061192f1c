#include <catch2/catch.hpp>

#include "spinchain/scan.hpp"
#include "spinchain/transfer.hpp"
#include "test_support.hpp"

using namespace spinchain;

namespace {

struct GroundSetup {
  ChainSpec spec;
  DensityMatrix rest;
  Propagator prop;
  TransferProbe probe;

  explicit GroundSetup(int n)
      : spec(n),
        rest(rest_state(spec, RestStateKind::ground())),
        prop(Propagator::diagonalize(build_xy_hamiltonian(spec))),
        probe(spec, rest, prop) {}
};

}  // namespace

TEST_CASE("transfer map at t = 0 with a ground rest", "[transfer]") {
  GroundSetup s(3);
  const TransferMatrix tm = s.probe.at(0.0);
  REQUIRE(std::abs(tm.entry(0, 0, 0, 0) - 1.0) < 1e-14);
  REQUIRE(std::abs(tm.entry(0, 0, 1, 1) - 1.0) < 1e-14);
  // receiver stuck in |0>: no population row, no coherence rows
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      REQUIRE(std::abs(tm.entry(1, 1, a, b)) < 1e-14);
      REQUIRE(std::abs(tm.entry(0, 1, a, b)) < 1e-14);
      REQUIRE(std::abs(tm.entry(1, 0, a, b)) < 1e-14);
    }
}

TEST_CASE("three-site ground chain reproduces its closed form", "[transfer]") {
  GroundSetup s(3);
  auto rng = testsup::make_rng(51);
  double worst_named = 0.0, worst_zero = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double t = 50.0 * testsup::uniform(rng);
    const TransferMatrix tm = s.probe.at(t);
    const TransferMatrix ref = closed_form_transfer(3, t);
    for (int row = 0; row < 4; ++row)
      for (int col = 0; col < 4; ++col) {
        const double dev = std::abs(tm.map(row, col) - ref.map(row, col));
        if (std::abs(ref.map(row, col)) > 0.0 || (row == col) || (row == 0 && col == 3))
          worst_named = std::max(worst_named, dev);
        else
          worst_zero = std::max(worst_zero, std::abs(tm.map(row, col)));
      }
  }
  REQUIRE(worst_named < 1e-10);
  REQUIRE(worst_zero < 1e-12);
}

TEST_CASE("four-site ground chain reproduces its closed form", "[transfer]") {
  GroundSetup s(4);
  auto rng = testsup::make_rng(52);
  for (int trial = 0; trial < 100; ++trial) {
    const double t = 50.0 * testsup::uniform(rng);
    const TransferMatrix tm = s.probe.at(t);
    const double r = closed_form_r(4, t);
    REQUIRE(std::abs(tm.entry(0, 1, 0, 1) - kImag * r) < 1e-10);
    REQUIRE(std::abs(tm.entry(1, 0, 1, 0) + kImag * r) < 1e-10);
    REQUIRE(std::abs(tm.entry(1, 1, 1, 1) - r * r) < 1e-10);
    REQUIRE(std::abs(tm.entry(0, 0, 1, 1) - (1.0 - r * r)) < 1e-10);
    const TransferMatrix ref = closed_form_transfer(4, t);
    REQUIRE((tm.map - ref.map).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("spectral probes equal literal matrix probes", "[transfer]") {
  auto rng = testsup::make_rng(53);
  // thermal rest exercises every spectral term; ground is the rank-one case
  for (const bool thermal : {false, true}) {
    ChainSpec spec(4);
    spec.beta = 1.0;
    const DensityMatrix rest =
        rest_state(spec, thermal ? RestStateKind::thermal(1.0) : RestStateKind::ground());
    const Propagator prop = Propagator::diagonalize(build_xy_hamiltonian(spec));
    const TransferProbe probe(spec, rest, prop);
    for (int trial = 0; trial < 5; ++trial) {
      const double t = 30.0 * testsup::uniform(rng);
      const Matrix4 literal = testsup::transfer_via_matrix_probes(spec, rest, prop, t);
      REQUIRE((probe.at(t).map - literal).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("transfer map invariants hold and are checked", "[transfer]") {
  ChainSpec spec(5);
  spec.beta = 0.6;
  spec.larmor = {0.0, 0.1, -0.4, 0.2, 0.7};
  const DensityMatrix rest = rest_state(spec, RestStateKind::thermal(0.6));
  const Propagator prop = Propagator::diagonalize(build_xy_hamiltonian(spec));
  const TransferProbe probe(spec, rest, prop);
  const TransferMatrix tm = probe.at(3.3);
  REQUIRE(tm.trace_row_residual() < 1e-13);
  REQUIRE(tm.hermiticity_residual() < 1e-13);

  TransferMatrix broken = tm;
  broken.map(0, 0) += 0.5;
  REQUIRE_THROWS_AS(broken.validate(), NumericalError);
}

TEST_CASE("transfer map reproduces the evolved receiver state", "[transfer][oracle]") {
  auto rng = testsup::make_rng(54);
  for (int n = 2; n <= 6; ++n) {
    ChainSpec spec(n);
    spec.beta = 0.8;
    const bool thermal = n % 2 == 0;
    const DensityMatrix rest =
        rest_state(spec, thermal ? RestStateKind::thermal(0.8) : RestStateKind::ground());
    const Propagator prop = Propagator::diagonalize(build_xy_hamiltonian(spec));
    const TransferProbe probe(spec, rest, prop);
    for (int trial = 0; trial < 4; ++trial) {
      const BlochVector x = testsup::random_bloch(rng);
      const double t = 25.0 * testsup::uniform(rng);
      const DensityMatrix direct = receiver_state(spec, x, rest, prop, t);
      const Matrix2 mapped = probe.at(t).apply(bloch_to_density(x).data());
      REQUIRE((direct.data() - mapped).cwiseAbs().maxCoeff() < 1e-11);
    }
  }
}

TEST_CASE("information system matches the closed-form determinants", "[transfer]") {
  GroundSetup s3(3);
  GroundSetup s4(4);
  auto rng = testsup::make_rng(55);
  for (int trial = 0; trial < 60; ++trial) {
    const double t = 50.0 * testsup::uniform(rng);
    const double det3 = compute_info_system(s3.probe.at(t)).coeffs.determinant();
    const double s = std::sin(t / (2.0 * std::sqrt(2.0)));
    REQUIRE(det3 == Approx(std::pow(s, 8.0)).margin(1e-10));

    const double det4 = compute_info_system(s4.probe.at(t)).coeffs.determinant();
    const double r4 = closed_form_r(4, t);
    REQUIRE(det4 == Approx(std::pow(r4, 4.0)).margin(1e-9));
  }
  REQUIRE(compute_info_system(s3.probe.at(0.0)).coeffs.determinant() == Approx(0.0).margin(1e-15));
}

TEST_CASE("information system maps Bloch vectors to receiver observables", "[transfer]") {
  auto rng = testsup::make_rng(56);
  ChainSpec spec(4);
  spec.beta = 1.1;
  const DensityMatrix rest = rest_state(spec, RestStateKind::thermal(1.1));
  const Propagator prop = Propagator::diagonalize(build_xy_hamiltonian(spec));
  const TransferProbe probe(spec, rest, prop);
  for (int trial = 0; trial < 10; ++trial) {
    const double t = 20.0 * testsup::uniform(rng);
    const BlochVector x = testsup::random_bloch(rng);
    const InfoSystem sys = compute_info_system(probe.at(t));
    const Eigen::Vector3d predicted = sys.observables(x);
    const DensityMatrix r = receiver_state(spec, x, rest, prop, t);
    REQUIRE(predicted(0) == Approx(r.data()(0, 1).real()).margin(1e-11));
    REQUIRE(predicted(1) == Approx(r.data()(0, 1).imag()).margin(1e-11));
    REQUIRE(predicted(2) == Approx(r.data()(0, 0).real()).margin(1e-11));
  }
}

TEST_CASE("classification of the three-site system", "[transfer]") {
  GroundSetup s(3);
  const double t_half = std::sqrt(2.0) * M_PI / 2.0;  // r = -1/2
  const TransferClass cls = classify(compute_info_system(s.probe.at(t_half)));
  REQUIRE(cls.classification == TransferGrade::complete);
  REQUIRE(cls.rank == 3);
  REQUIRE(cls.det == Approx(0.0625).margin(1e-12));
  REQUIRE_FALSE(cls.near_singular);

  // nothing has reached the receiver yet at t = 0: the system is exactly zero
  const TransferClass at0 = classify(compute_info_system(s.probe.at(0.0)));
  REQUIRE(at0.rank == 0);
  REQUIRE(at0.classification == TransferGrade::none);

  REQUIRE_THROWS_AS(classify(compute_info_system(s.probe.at(1.0)), -1.0, 1e-8),
                    std::invalid_argument);
}

TEST_CASE("four-site thermal rank degeneracy", "[transfer]") {
  for (const double omega4 : {0.0, 1.0}) {
    ChainSpec spec(4);
    spec.beta = 1.0;
    spec.larmor = {0.0, 0.0, 0.0, omega4};
    const DensityMatrix rest = rest_state(spec, RestStateKind::thermal(1.0));
    const Propagator prop = Propagator::diagonalize(build_xy_hamiltonian(spec));
    const TransferProbe probe(spec, rest, prop);
    int rank3 = 0;
    for (int k = 0; k < 10; ++k) {
      const double t = 0.93 + 1.21 * k;
      const TransferClass cls = classify(compute_info_system(probe.at(t)));
      if (omega4 == 0.0) {
        REQUIRE(cls.rank == 1);
        REQUIRE(cls.classification == TransferGrade::partial);
      } else if (!cls.near_singular) {
        REQUIRE(cls.rank == 3);
        ++rank3;
      }
    }
    if (omega4 != 0.0) REQUIRE(rank3 >= 7);
  }
}

TEST_CASE("ideal-transfer detection", "[transfer]") {
  TransferMatrix identity_map;
  identity_map.map = Matrix4::Identity();
  const PstCheck exact = pst_check(identity_map);
  REQUIRE(exact.exact);
  REQUIRE(exact.local_unitary);

  // the three-site chain reaches the receiver only up to diag(i, -i)
  GroundSetup s(3);
  const double tp = std::sqrt(2.0) * M_PI;
  const PstCheck at_tp = pst_check(s.probe.at(tp));
  REQUIRE_FALSE(at_tp.exact);
  REQUIRE(at_tp.local_unitary);
  REQUIRE(at_tp.local_residual < 1e-10);
  REQUIRE(std::abs(at_tp.witness(0, 0) - kImag) < 1e-10);
  REQUIRE(std::abs(at_tp.witness(1, 1) + kImag) < 1e-10);

  // ideal transfer implies a complete information system
  const TransferClass cls = classify(compute_info_system(s.probe.at(tp)));
  REQUIRE(cls.classification == TransferGrade::complete);
  REQUIRE(std::abs(cls.det) > 0.9);

  REQUIRE_THROWS_AS(pst_check(identity_map, 0.0), std::invalid_argument);
}

TEST_CASE("closed-form amplitude reference values", "[transfer]") {
  REQUIRE(closed_form_r(3, std::sqrt(2.0) * M_PI) == Approx(-1.0).margin(1e-14));
  REQUIRE(closed_form_r(3, std::sqrt(2.0) * M_PI / 2.0) == Approx(-0.5).margin(1e-14));
  REQUIRE(closed_form_r(3, 0.0) == 0.0);
  REQUIRE(closed_form_r(4, 0.0) == 0.0);
  // frozen from a long-double evaluation of the four-site form at t = pi
  REQUIRE(closed_form_r(4, M_PI) == Approx(0.441160972880933).margin(1e-12));
  REQUIRE_THROWS_AS(closed_form_r(5, 1.0), std::invalid_argument);
}
