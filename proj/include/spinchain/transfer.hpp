#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinchain/chain.hpp"
#include "spinchain/density.hpp"
#include "spinchain/evolution.hpp"
#include "spinchain/types.hpp"

namespace spinchain {

inline constexpr double kTransferMapTol = 1e-12;
inline constexpr double kDefaultDetTol = 1e-8;
inline constexpr double kDefaultRankTol = 1e-8;
inline constexpr double kDefaultPstTol = 1e-8;

// The map entries are O(1) by the trace rows, so singular values of the
// information system below this absolute level are indistinguishable from
// arithmetic noise; a purely relative rank cut would read rank 3 off a
// noise-only matrix at an exactly singular instant.
inline constexpr double kRankAbsoluteFloor = 1e-13;

// Spectral terms of the rest state below this weight cannot move any map
// entry at working precision and are dropped from the probe set.
inline constexpr double kRestWeightCutoff = 1e-15;

// The 4x4 linear map from sender matrix elements at t = 0 to receiver matrix
// elements at time t.  Row index packs the receiver pair (gamma, delta) as
// 2*gamma + delta, column index packs the sender pair (alpha, beta) the same
// way.
struct TransferMatrix {
  Matrix4 map = Matrix4::Zero();
  double time = 0.0;

  Complex entry(int gamma, int delta, int alpha, int beta) const {
    return map(2 * gamma + delta, 2 * alpha + beta);
  }

  // Receiver trace equals sender trace for every probe column.
  double trace_row_residual() const {
    double worst = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const Complex sum = entry(0, 0, a, b) + entry(1, 1, a, b);
        worst = std::max(worst, std::abs(sum - (a == b ? 1.0 : 0.0)));
      }
    return worst;
  }

  // Hermitian inputs must map to Hermitian outputs: T_{dg;ba} = conj(T_{gd;ab}).
  double hermiticity_residual() const {
    double worst = 0.0;
    for (int g = 0; g < 2; ++g)
      for (int d = 0; d < 2; ++d)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            worst = std::max(worst,
                             std::abs(entry(d, g, b, a) - std::conj(entry(g, d, a, b))));
    return worst;
  }

  void validate(double tol = kTransferMapTol) const {
    const double tr = trace_row_residual();
    if (tr > tol)
      throw NumericalError("transfer matrix: trace rows violated by " + detail::sci(tr));
    const double hr = hermiticity_residual();
    if (hr > tol)
      throw NumericalError("transfer matrix: hermiticity pairing violated by " +
                           detail::sci(hr));
  }

  // rho^R_{gd} = sum_{ab} T_{gd;ab} rho^S_{ab}.
  Matrix2 apply(const Matrix2& sender) const {
    Matrix2 out = Matrix2::Zero();
    for (int g = 0; g < 2; ++g)
      for (int d = 0; d < 2; ++d)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) out(g, d) += entry(g, d, a, b) * sender(a, b);
    return out;
  }
};

// Extracts the transfer map by linearity: each sender matrix unit E_ab,
// tensored with the rest state, is evolved and reduced to the receiver site,
// giving one column of the map.  The rest state enters through its spectral
// decomposition, so one probe column costs a pair of vector evolutions per
// rest eigenvector instead of a full matrix conjugation; that keeps long time
// scans affordable on large registers.  Self-contained copy of the spectral
// data, safe to share across scan worker threads.
class TransferProbe {
 public:
  TransferProbe(const ChainSpec& spec, const DensityMatrix& rest, const Propagator& prop) {
    spec.validate();
    if (rest.sites() != spec.sites - 1)
      throw std::invalid_argument("transfer probe: rest register must cover sites 2.." +
                                  std::to_string(spec.sites));
    if (!rest.physical())
      throw std::invalid_argument("transfer probe: rest state must be physical");
    const Eigen::Index d = Eigen::Index{1} << spec.sites;
    if (prop.dimension() != d)
      throw std::invalid_argument("transfer probe: propagator dimension mismatch");

    receiver_shift_ = spec.sites - spec.receiver_site();
    energies_ = prop.eigenvalues();
    basis_ = prop.eigenvectors();

    Eigen::SelfAdjointEigenSolver<Matrix> es(rest.data());
    if (es.info() != Eigen::Success)
      throw NumericalError("transfer probe: rest-state eigensolver failed");
    const Eigen::Index dr = rest.dimension();
    for (Eigen::Index k = 0; k < dr; ++k) {
      const double p = es.eigenvalues()(k);
      if (p <= kRestWeightCutoff) continue;
      weights_.push_back(p);
      // |alpha> on the sender (high bit) tensor the k-th rest eigenvector,
      // rotated into the Hamiltonian eigenbasis once.
      for (int alpha = 0; alpha < 2; ++alpha)
        probes_[alpha].push_back(basis_.middleRows(alpha * dr, dr).adjoint() *
                                 es.eigenvectors().col(k));
    }
  }

  TransferMatrix at(double t) const {
    const Eigen::Index d = basis_.rows();
    Vector ph(d);
    for (Eigen::Index j = 0; j < d; ++j) ph(j) = std::exp(-kImag * energies_(j) * t);

    const std::size_t terms = weights_.size();
    std::array<std::vector<Vector>, 2> evolved;
    for (int alpha = 0; alpha < 2; ++alpha) {
      evolved[alpha].reserve(terms);
      for (std::size_t k = 0; k < terms; ++k)
        evolved[alpha].push_back(basis_ * ph.cwiseProduct(probes_[alpha][k]));
    }

    TransferMatrix out;
    out.time = t;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Matrix2 red = Matrix2::Zero();
        for (std::size_t k = 0; k < terms; ++k)
          red += weights_[k] * reduce(evolved[a][k], evolved[b][k]);
        for (int g = 0; g < 2; ++g)
          for (int dd = 0; dd < 2; ++dd) out.map(2 * g + dd, 2 * a + b) = red(g, dd);
      }
    out.validate();
    return out;
  }

 private:
  // 2x2 receiver reduction of the dyad |u><v|.
  Matrix2 reduce(const Vector& u, const Vector& v) const {
    Matrix2 m = Matrix2::Zero();
    const Eigen::Index mask = Eigen::Index{1} << receiver_shift_;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const int g = (i & mask) ? 1 : 0;
      const Eigen::Index base = i & ~mask;
      m(g, 0) += u(i) * std::conj(v(base));
      m(g, 1) += u(i) * std::conj(v(base | mask));
    }
    return m;
  }

  int receiver_shift_ = 0;
  RealVector energies_;
  Matrix basis_;
  std::vector<double> weights_;
  std::array<std::vector<Vector>, 2> probes_;
};

inline TransferMatrix compute_transfer_matrix(const ChainSpec& spec, const DensityMatrix& rest,
                                              const Propagator& prop, double t) {
  return TransferProbe(spec, rest, prop).at(t);
}

// Real 3x3 reduction of the transfer map acting on the Bloch parameters:
//   (Re rho^R_01, Im rho^R_01, rho^R_00) = coeffs * (x1, x2, x3) + offset.
struct InfoSystem {
  Eigen::Matrix3d coeffs = Eigen::Matrix3d::Zero();
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  double time = 0.0;

  Eigen::Vector3d observables(const BlochVector& x) const {
    return coeffs * Eigen::Vector3d(x.x1, x.x2, x.x3) + offset;
  }
};

// Substitutes the Bloch parametrization of the sender into the transfer map
// and splits the receiver observables into real components.  The imaginary
// parts of the third row cancel by the hermiticity pairing.
inline InfoSystem compute_info_system(const TransferMatrix& tm) {
  InfoSystem sys;
  sys.time = tm.time;
  const Complex c01_00 = tm.entry(0, 1, 0, 0);
  const Complex c01_01 = tm.entry(0, 1, 0, 1);
  const Complex c01_10 = tm.entry(0, 1, 1, 0);
  const Complex c01_11 = tm.entry(0, 1, 1, 1);
  const Complex c00_00 = tm.entry(0, 0, 0, 0);
  const Complex c00_01 = tm.entry(0, 0, 0, 1);
  const Complex c00_10 = tm.entry(0, 0, 1, 0);
  const Complex c00_11 = tm.entry(0, 0, 1, 1);

  sys.coeffs(0, 0) = (c01_00 - c01_11).real();
  sys.coeffs(0, 1) = (c01_01 + c01_10).real();
  sys.coeffs(0, 2) = -(c01_01 - c01_10).imag();
  sys.offset(0) = c01_11.real();

  sys.coeffs(1, 0) = (c01_00 - c01_11).imag();
  sys.coeffs(1, 1) = (c01_01 + c01_10).imag();
  sys.coeffs(1, 2) = (c01_01 - c01_10).real();
  sys.offset(1) = c01_11.imag();

  sys.coeffs(2, 0) = (c00_00 - c00_11).real();
  sys.coeffs(2, 1) = (c00_01 + c00_10).real();
  sys.coeffs(2, 2) = (kImag * (c00_01 - c00_10)).real();
  sys.offset(2) = c00_11.real();
  return sys;
}

enum class TransferGrade { complete, partial, none };

inline const char* to_string(TransferGrade g) {
  switch (g) {
    case TransferGrade::complete: return "complete";
    case TransferGrade::partial: return "partial";
    case TransferGrade::none: return "none";
  }
  return "?";
}

struct TransferClass {
  int rank = 0;
  double det = 0.0;
  double condition = std::numeric_limits<double>::infinity();
  TransferGrade classification = TransferGrade::none;
  bool near_singular = true;  // |det| < det_tol
};

inline TransferClass classify(const InfoSystem& sys, double det_tol = kDefaultDetTol,
                              double rank_tol = kDefaultRankTol) {
  if (!(det_tol > 0.0) || !(rank_tol > 0.0))
    throw std::invalid_argument("classify: tolerances must be positive");
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(sys.coeffs);
  const Eigen::Vector3d& sv = svd.singularValues();
  TransferClass out;
  out.det = sys.coeffs.determinant();
  const double cut = std::max(rank_tol * sv(0), kRankAbsoluteFloor);
  for (int i = 0; i < 3; ++i)
    if (sv(i) >= cut) ++out.rank;
  out.condition = sv(2) > 0.0 ? sv(0) / sv(2) : std::numeric_limits<double>::infinity();
  out.classification = out.rank == 3   ? TransferGrade::complete
                       : out.rank == 0 ? TransferGrade::none
                                       : TransferGrade::partial;
  out.near_singular = std::abs(out.det) < det_tol;
  return out;
}

struct PstCheck {
  bool exact = false;
  bool local_unitary = false;
  double exact_residual = std::numeric_limits<double>::infinity();
  double local_residual = std::numeric_limits<double>::infinity();
  double phase = 0.0;  // witness is diag(e^{i phase}, e^{-i phase})
  Matrix2 witness = Matrix2::Identity();
};

// Ideal state transfer test.  Exact: the map is the identity.  Relaxed: the
// map equals conjugation by some diagonal unitary diag(e^{i phi}, e^{-i phi});
// such a map fixes populations and rotates coherences by e^{2 i phi}, so the
// best phase is read off the (01;01) entry and the residual is checked
// against the remaining entries.
inline PstCheck pst_check(const TransferMatrix& tm, double tol = kDefaultPstTol) {
  if (!(tol > 0.0)) throw std::invalid_argument("pst_check: tolerance must be positive");
  PstCheck out;
  out.exact_residual = (tm.map - Matrix4::Identity()).cwiseAbs().maxCoeff();
  out.exact = out.exact_residual < tol;

  const Complex c = tm.entry(0, 1, 0, 1);
  const double phi = std::abs(c) == 0.0 ? 0.0 : 0.5 * std::arg(c);
  Matrix4 target = Matrix4::Identity();
  target(1, 1) = std::exp(2.0 * kImag * phi);
  target(2, 2) = std::exp(-2.0 * kImag * phi);
  out.local_residual = (tm.map - target).cwiseAbs().maxCoeff();
  out.local_unitary = out.local_residual < tol;
  out.phase = phi;
  out.witness = Matrix2::Zero();
  out.witness(0, 0) = std::exp(kImag * phi);
  out.witness(1, 1) = std::exp(-kImag * phi);
  return out;
}

// Coherence transfer amplitude of the uniform ground-rest chain in closed
// form, in 1/D time units.  Only the three- and four-site chains admit one.
inline double closed_form_r(int n, double t) {
  if (n == 3) {
    const double s = std::sin(t / (2.0 * std::sqrt(2.0)));
    return -s * s;
  }
  if (n == 4) {
    const double s5 = std::sqrt(5.0);
    return -(2.0 * std::sin((1.0 + s5) * t / 4.0) +
             (3.0 + s5) * std::sin((1.0 - s5) * t / 4.0)) /
           (5.0 + s5);
  }
  throw std::invalid_argument("closed_form_r: only n = 3 and n = 4 are available, got " +
                              std::to_string(n));
}

// Full closed-form map for the ground-rest chain: populations move with r^2,
// coherences with r (n = 3) or +-i r (n = 4); everything else vanishes.
inline TransferMatrix closed_form_transfer(int n, double t) {
  const double r = closed_form_r(n, t);
  TransferMatrix tm;
  tm.time = t;
  tm.map(0, 0) = 1.0;
  tm.map(0, 3) = 1.0 - r * r;
  tm.map(3, 3) = r * r;
  if (n == 3) {
    tm.map(1, 1) = r;
    tm.map(2, 2) = r;
  } else {
    tm.map(1, 1) = kImag * r;
    tm.map(2, 2) = -kImag * r;
  }
  return tm;
}

}  // namespace spinchain
