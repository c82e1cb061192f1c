#include <catch2/catch.hpp>

#include "spinchain/chain.hpp"
#include "test_support.hpp"

using namespace spinchain;

TEST_CASE("two-site chain has a single hop", "[chain]") {
  ChainSpec spec(2);
  const Matrix h = build_xy_hamiltonian(spec);
  // basis order 00, 01, 10, 11
  REQUIRE(h(1, 2) == Complex{-0.5, 0.0});
  REQUIRE(h(2, 1) == Complex{-0.5, 0.0});
  Matrix rest = h;
  rest(1, 2) = rest(2, 1) = 0.0;
  REQUIRE(rest.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("chain Hamiltonian is exactly Hermitian", "[chain]") {
  for (int n : {2, 4, 7}) {
    ChainSpec spec(n);
    spec.coupling = 1.7;
    const Matrix h = build_xy_hamiltonian(spec);
    REQUIRE((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("three-site single-excitation block spectrum", "[chain]") {
  const Matrix h = build_xy_hamiltonian(ChainSpec(3));
  // excitation labels: site1 -> 4, site2 -> 2, site3 -> 1
  const std::vector<Eigen::Index> block{4, 2, 1};
  Matrix sub(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) sub(i, j) = h(block[i], block[j]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
  const double s = 1.0 / std::sqrt(2.0);
  REQUIRE(es.eigenvalues()(0) == Approx(-s).margin(1e-12));
  REQUIRE(es.eigenvalues()(1) == Approx(0.0).margin(1e-12));
  REQUIRE(es.eigenvalues()(2) == Approx(s).margin(1e-12));
}

TEST_CASE("chain Hamiltonian scales linearly in the coupling", "[chain]") {
  ChainSpec spec(4);
  spec.coupling = 0.8;
  ChainSpec spec2 = spec;
  spec2.coupling = 1.6;
  REQUIRE((build_xy_hamiltonian(spec2) - 2.0 * build_xy_hamiltonian(spec))
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("magnetization commutes with the chain", "[chain]") {
  auto rng = testsup::make_rng(21);
  for (int n = 2; n <= 8; ++n) {
    ChainSpec spec(n);
    spec.coupling = 0.25 + testsup::uniform(rng);
    const Matrix h = build_xy_hamiltonian(spec);
    const Matrix mz = total_magnetization(spec);
    REQUIRE((h * mz - mz * h).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("summed site z operators equal the magnetization", "[chain]") {
  ChainSpec spec(4);
  Matrix sum = Matrix::Zero(16, 16);
  for (int site = 1; site <= 4; ++site) sum += site_operator(spec, site, SpinComponent::z);
  REQUIRE((sum - total_magnetization(spec)).cwiseAbs().maxCoeff() == 0.0);
  const Matrix h = build_xy_hamiltonian(spec);
  REQUIRE((h * sum - sum * h).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("site operators embed at the right slot", "[chain]") {
  // a single site: plain spin matrices
  const Matrix z1 = site_operator(ChainSpec(1), 1, SpinComponent::z);
  REQUIRE(z1(0, 0) == Complex{0.5, 0.0});
  REQUIRE(z1(1, 1) == Complex{-0.5, 0.0});

  const Matrix p2 = site_operator(ChainSpec(2), 2, SpinComponent::plus);
  const Matrix expected = tensor_product(Matrix::Identity(2, 2), spin_plus());
  REQUIRE((p2 - expected).cwiseAbs().maxCoeff() == 0.0);

  REQUIRE_THROWS_AS(site_operator(ChainSpec(2), 3, SpinComponent::z), std::invalid_argument);
}

TEST_CASE("rest Hamiltonian basics", "[chain]") {
  // three sites, no field: the flip-flop pair on sites 2..3 embedded whole
  ChainSpec spec3(3);
  const Matrix expected =
      -0.5 * (site_operator(spec3, 2, SpinComponent::plus) *
                  site_operator(spec3, 3, SpinComponent::minus) +
              site_operator(spec3, 2, SpinComponent::minus) *
                  site_operator(spec3, 3, SpinComponent::plus));
  REQUIRE((build_rest_hamiltonian(spec3) - expected).cwiseAbs().maxCoeff() < 1e-15);

  // zero field leaves no diagonal
  ChainSpec spec4(4);
  REQUIRE(build_rest_hamiltonian(spec4).diagonal().cwiseAbs().maxCoeff() == 0.0);

  // a receiver-site field splits the diagonal by the last bit
  ChainSpec spec4w(4);
  spec4w.larmor = {0.0, 0.0, 0.0, 1.0};
  const Matrix h = build_rest_hamiltonian(spec4w);
  const BasisConvention basis(4);
  for (Eigen::Index b = 0; b < 16; ++b) {
    const double want = basis.bit(b, 4) == 0 ? 0.5 : -0.5;
    REQUIRE((h(b, b) - build_rest_hamiltonian(spec4)(b, b)).real() == Approx(want));
  }
}

TEST_CASE("rest Hamiltonian with zero field is the embedded sub-chain", "[chain]") {
  ChainSpec spec(5);
  const Matrix reduced = build_rest_hamiltonian_reduced(spec);
  const Matrix sub = build_xy_hamiltonian(ChainSpec(4));
  REQUIRE((reduced - sub).cwiseAbs().maxCoeff() == 0.0);
  // embedding acts trivially on the sender
  const Matrix full = build_rest_hamiltonian(spec);
  REQUIRE((full - tensor_product(Matrix::Identity(2, 2), reduced)).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("chain spec validation names the offending field", "[chain]") {
  ChainSpec same(2);
  same.receiver = 1;
  REQUIRE_THROWS_WITH(same.validate(), Catch::Contains("receiver"));

  ChainSpec big(13);
  REQUIRE_THROWS_WITH(big.validate(), Catch::Contains("sites"));

  ChainSpec negative_beta(3);
  negative_beta.beta = -1.0;
  REQUIRE_THROWS_WITH(negative_beta.validate(), Catch::Contains("beta"));

  ChainSpec wrong_larmor(3);
  wrong_larmor.larmor = {0.0, 0.0};
  REQUIRE_THROWS_WITH(wrong_larmor.validate(), Catch::Contains("larmor"));

  ChainSpec moved_sender(3);
  moved_sender.sender = 2;
  REQUIRE_THROWS_WITH(moved_sender.validate(), Catch::Contains("sender"));

  ChainSpec sender_field(3);
  sender_field.larmor = {0.5, 0.0, 0.0};
  REQUIRE_NOTHROW(sender_field.validate());
  REQUIRE_FALSE(sender_field.warnings().empty());
}
