#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "spinchain/basis.hpp"
#include "spinchain/types.hpp"

namespace spinchain {

// Tolerances for the physical-state invariants.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPositivityFloor = -1e-10;  // eigensolver noise floor
inline constexpr double kBlochBallTol = 1e-12;

// A density matrix is either a physical state (Hermitian, unit trace,
// positive semidefinite) or a "probe": an arbitrary matrix of the same shape
// used to exercise linear maps, e.g. matrix units flowing through the
// evolution.
enum class StateMode { physical, probe };

// Real parametrization of a one-qubit state:
//   rho = [[x1, x2 + i x3], [x2 - i x3, 1 - x1]].
struct BlochVector {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;

  // (1-2x1)^2 + (2x2)^2 + (2x3)^2 - 1; non-positive inside the ball.
  double ball_excess() const {
    const double u1 = 1.0 - 2.0 * x1;
    const double u2 = 2.0 * x2;
    const double u3 = 2.0 * x3;
    return u1 * u1 + u2 * u2 + u3 * u3 - 1.0;
  }

  bool in_ball(double tol = kBlochBallTol) const { return ball_excess() <= tol; }
};

class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m, StateMode mode = StateMode::physical)
      : data_(std::move(m)), mode_(mode), sites_(infer_sites(data_)) {
    if (mode_ == StateMode::physical) validate_physical(data_);
  }

  static DensityMatrix probe(Matrix m) {
    return DensityMatrix(std::move(m), StateMode::probe);
  }

  const Matrix& data() const { return data_; }
  StateMode mode() const { return mode_; }
  bool physical() const { return mode_ == StateMode::physical; }
  int sites() const { return sites_; }
  Eigen::Index dimension() const { return data_.rows(); }

 private:
  static int infer_sites(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() < 2)
      throw std::invalid_argument("density matrix: square matrix of dimension >= 2 required");
    const Eigen::Index d = m.rows();
    int n = 0;
    while ((Eigen::Index{1} << n) < d) ++n;
    if ((Eigen::Index{1} << n) != d)
      throw std::invalid_argument("density matrix: dimension " + std::to_string(d) +
                                  " is not a power of two");
    if (n > kMaxSites)
      throw std::invalid_argument("density matrix: register exceeds the " +
                                  std::to_string(kMaxSites) + "-site cap");
    return n;
  }

  static void validate_physical(const Matrix& m) {
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kHermitianTol)
      throw std::invalid_argument("density matrix: not Hermitian (deviation " +
                                  detail::sci(herm) + ")");
    const double tr = std::abs(m.trace() - Complex{1.0, 0.0});
    if (tr > kTraceTol)
      throw std::invalid_argument("density matrix: trace differs from 1 by " +
                                  detail::sci(tr));
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw NumericalError("density matrix: eigensolver failed during validation");
    const double lo = es.eigenvalues().minCoeff();
    if (lo < kPositivityFloor)
      throw std::invalid_argument("density matrix: negative eigenvalue " + detail::sci(lo));
  }

  Matrix data_;
  StateMode mode_;
  int sites_;
};

inline DensityMatrix bloch_to_density(const BlochVector& x) {
  const double excess = x.ball_excess();
  if (excess > kBlochBallTol)
    throw std::invalid_argument("bloch vector: outside the unit ball by " +
                                detail::sci(excess));
  Matrix rho(2, 2);
  rho(0, 0) = Complex{x.x1, 0.0};
  rho(0, 1) = Complex{x.x2, x.x3};
  rho(1, 0) = Complex{x.x2, -x.x3};
  rho(1, 1) = Complex{1.0 - x.x1, 0.0};
  return DensityMatrix(std::move(rho));
}

inline BlochVector density_to_bloch(const DensityMatrix& rho) {
  if (rho.dimension() != 2)
    throw std::invalid_argument("density_to_bloch: one-qubit state required");
  if (!rho.physical())
    throw std::invalid_argument("density_to_bloch: physical state required");
  const Matrix& m = rho.data();
  return BlochVector{m(0, 0).real(), m(0, 1).real(), m(0, 1).imag()};
}

}  // namespace spinchain
