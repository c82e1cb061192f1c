#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "spinchain/algebra.hpp"
#include "spinchain/chain.hpp"
#include "spinchain/density.hpp"
#include "spinchain/initial_state.hpp"
#include "spinchain/types.hpp"

namespace spinchain {

inline constexpr double kReconstructionTol = 1e-11;
inline constexpr double kUnitarityTol = 1e-12;

// Spectral form of a constant Hamiltonian; U(t) = V diag(exp(-i E t)) V^+.
// Immutable after construction, so any number of times may be evaluated
// concurrently against the same propagator.
class Propagator {
 public:
  static Propagator diagonalize(const Matrix& h) {
    if (h.rows() != h.cols())
      throw std::invalid_argument("diagonalize: square matrix required");
    const double herm = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kHermitianTol)
      throw std::invalid_argument("diagonalize: matrix is not Hermitian (deviation " +
                                  detail::sci(herm) + ")");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("diagonalize: eigensolver failed");
    Propagator p(es.eigenvalues(), es.eigenvectors(), detail::fingerprint(h));
    const double recon =
        (p.vectors_ * p.energies_.asDiagonal() * p.vectors_.adjoint() - h).cwiseAbs().maxCoeff();
    if (recon > kReconstructionTol)
      throw NumericalError("diagonalize: reconstruction error " + detail::sci(recon));
    const double unit = (p.vectors_.adjoint() * p.vectors_ -
                         Matrix::Identity(h.rows(), h.cols()))
                            .cwiseAbs()
                            .maxCoeff();
    if (unit > kUnitarityTol)
      throw NumericalError("diagonalize: eigenbasis not unitary, deviation " +
                           detail::sci(unit));
    return p;
  }

  const RealVector& eigenvalues() const { return energies_; }
  const Matrix& eigenvectors() const { return vectors_; }
  Eigen::Index dimension() const { return energies_.size(); }
  std::uint64_t fingerprint() const { return fingerprint_; }

  Vector phases(double t) const {
    check_time(t);
    return (-kImag * t * energies_.cast<Complex>().array()).exp();
  }

  Matrix unitary_at(double t) const {
    const Vector ph = phases(t);
    return (vectors_ * ph.asDiagonal()) * vectors_.adjoint();
  }

  Vector evolve_vector(const Vector& psi, double t) const {
    if (psi.size() != dimension())
      throw std::invalid_argument("evolve_vector: dimension mismatch");
    return vectors_ * phases(t).cwiseProduct(vectors_.adjoint() * psi);
  }

  Matrix evolve_matrix(const Matrix& rho, double t) const {
    if (rho.rows() != dimension() || rho.cols() != dimension())
      throw std::invalid_argument("evolve: dimension mismatch");
    const Matrix u = unitary_at(t);
    return u * rho * u.adjoint();
  }

  DensityMatrix evolve(const DensityMatrix& rho, double t) const {
    return DensityMatrix(evolve_matrix(rho.data(), t), rho.mode());
  }

 private:
  Propagator(RealVector energies, Matrix vectors, std::uint64_t fp)
      : energies_(std::move(energies)), vectors_(std::move(vectors)), fingerprint_(fp) {}

  static void check_time(double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("time: must be finite");
  }

  RealVector energies_;
  Matrix vectors_;
  std::uint64_t fingerprint_;
};

inline Propagator diagonalize(const Matrix& h) { return Propagator::diagonalize(h); }

// Receiver's reduced state after evolving the product initial state for time t.
inline DensityMatrix receiver_state(const ChainSpec& spec, const BlochVector& x,
                                    const DensityMatrix& rest, const Propagator& prop,
                                    double t) {
  spec.validate();
  if (rest.sites() != spec.sites - 1)
    throw std::invalid_argument("receiver_state: rest register must cover sites 2.." +
                                std::to_string(spec.sites));
  if (prop.dimension() != (Eigen::Index{1} << spec.sites))
    throw std::invalid_argument("receiver_state: propagator dimension mismatch");
  const DensityMatrix rho0 = assemble_initial(x, rest);
  const DensityMatrix rho_t = prop.evolve(rho0, t);
  return partial_trace(rho_t, {spec.receiver_site()});
}

}  // namespace spinchain
