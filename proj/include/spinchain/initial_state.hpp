#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "spinchain/algebra.hpp"
#include "spinchain/chain.hpp"
#include "spinchain/density.hpp"
#include "spinchain/types.hpp"

namespace spinchain {

// Initial state of the rest register (sites 2..N): either every site in |0>,
// or the Gibbs state of the rest Hamiltonian at inverse temperature beta.
class RestStateKind {
 public:
  RestStateKind() = default;  // ground

  static RestStateKind ground() { return RestStateKind(); }

  static RestStateKind thermal(double beta) {
    if (!(beta >= 0.0))
      throw std::invalid_argument("beta: need >= 0, got " + std::to_string(beta));
    RestStateKind k;
    k.thermal_ = true;
    k.beta_ = beta;
    return k;
  }

  bool is_thermal() const { return thermal_; }
  double beta() const { return beta_; }

 private:
  bool thermal_ = false;
  double beta_ = 0.0;
};

inline DensityMatrix rest_state(const ChainSpec& spec, const RestStateKind& kind) {
  spec.validate();
  const Eigen::Index d = Eigen::Index{1} << (spec.sites - 1);
  if (!kind.is_thermal()) {
    Matrix rho = Matrix::Zero(d, d);
    rho(0, 0) = 1.0;
    return DensityMatrix(std::move(rho));
  }
  const Matrix h = build_rest_hamiltonian_reduced(spec);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("rest_state: eigensolver failed");
  // Gibbs weights, shifted by the ground energy so large beta cannot underflow
  // the normalization.
  Eigen::ArrayXd w =
      (-kind.beta() * (es.eigenvalues().array() - es.eigenvalues().minCoeff())).exp();
  w /= w.sum();
  Matrix rho = es.eigenvectors() * w.matrix().cast<Complex>().asDiagonal() *
               es.eigenvectors().adjoint();
  rho = 0.5 * (rho + rho.adjoint().eval());
  return DensityMatrix(std::move(rho));
}

// Product initial state: sender in the given Bloch state, sites 2..N in rest.
inline DensityMatrix assemble_initial(const BlochVector& x, const DensityMatrix& rest) {
  if (!rest.physical())
    throw std::invalid_argument("assemble_initial: rest state must be physical");
  if (rest.sites() + 1 > kMaxSites)
    throw std::invalid_argument("assemble_initial: combined register exceeds the " +
                                std::to_string(kMaxSites) + "-site cap");
  const DensityMatrix sender = bloch_to_density(x);
  return DensityMatrix(tensor_product(sender.data(), rest.data()));
}

}  // namespace spinchain
