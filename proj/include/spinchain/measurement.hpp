#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinchain/density.hpp"
#include "spinchain/transfer.hpp"
#include "spinchain/types.hpp"

namespace spinchain {

inline constexpr double kDirectionDetTol = 1e-10;

// Polarization directions of the three measurement channels, one per row.
struct DirectionSet {
  Eigen::Matrix3d rows = Eigen::Matrix3d::Identity();

  static DirectionSet identity() { return DirectionSet{}; }

  void validate(double tol = kDirectionDetTol) const {
    const double det = rows.determinant();
    if (std::abs(det) <= tol)
      throw std::invalid_argument("directions: matrix is singular (det " + detail::sci(det) +
                                  "), channels do not resolve the receiver state");
  }

  // The canonical orthogonal axes break the row-sum normalization, so
  // deviations from it are reported as warnings rather than rejected.
  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    for (int n = 0; n < 3; ++n) {
      if (std::abs(rows.row(n).sum() - 1.0) > 1e-12)
        out.push_back("directions: row " + std::to_string(n + 1) + " sums to " +
                      std::to_string(rows.row(n).sum()) + ", not 1");
    }
    return out;
  }
};

// Average spin projections measured on the three channel receivers.
struct PolarizationReadout {
  Eigen::Vector3d values = Eigen::Vector3d::Zero();
  double time = 0.0;
  double sigma = 0.0;  // noise amplitude the readout was taken with
};

// J = a1 Re rho_01 - a2 Im rho_01 + a3 (rho_00 - 1/2); identical to the trace
// against a1 I_x + a2 I_y + a3 I_z.
inline double polarization(const DensityMatrix& rho, const Eigen::Vector3d& dir) {
  if (rho.dimension() != 2)
    throw std::invalid_argument("polarization: one-qubit receiver state required");
  if (!rho.physical())
    throw std::invalid_argument("polarization: physical state required");
  const Matrix& m = rho.data();
  return dir(0) * m(0, 1).real() - dir(1) * m(0, 1).imag() +
         dir(2) * (m(0, 0).real() - 0.5);
}

inline PolarizationReadout measure_polarizations(const DensityMatrix& rho,
                                                 const DirectionSet& dirs, double time) {
  dirs.validate();
  PolarizationReadout out;
  out.time = time;
  for (int n = 0; n < 3; ++n) out.values(n) = polarization(rho, dirs.rows.row(n));
  return out;
}

// Composition of the measurement directions with the information system:
//   J_n = sum_i B_ni x_i + B_n0.
struct BSystem {
  Eigen::Matrix3d coeffs = Eigen::Matrix3d::Zero();
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  double time = 0.0;
};

inline BSystem compute_B(const InfoSystem& sys, const DirectionSet& dirs) {
  dirs.validate();
  BSystem b;
  b.time = sys.time;
  for (int n = 0; n < 3; ++n) {
    for (int i = 0; i < 3; ++i)
      b.coeffs(n, i) = dirs.rows(n, 0) * sys.coeffs(0, i) - dirs.rows(n, 1) * sys.coeffs(1, i) +
                       dirs.rows(n, 2) * sys.coeffs(2, i);
    b.offset(n) = dirs.rows(n, 0) * sys.offset(0) - dirs.rows(n, 1) * sys.offset(1) +
                  dirs.rows(n, 2) * sys.offset(2) - 0.5 * dirs.rows(n, 2);
  }
  return b;
}

// Outcome of the linear inversion.  A full-rank system pins the sender state;
// a rank-deficient one yields the least-norm point plus the unresolved
// subspace.  Solutions outside the Bloch ball are flagged, not projected,
// unless the violation is within numerical fuzz.
struct ReconstructionReport {
  TransferGrade classification = TransferGrade::none;
  int rank = 0;
  std::optional<BlochVector> x;            // unique recovery (rank 3 only)
  Eigen::Vector3d solution = Eigen::Vector3d::Zero();  // least-norm point
  std::vector<Eigen::Vector3d> nullspace;  // basis of the unresolved directions
  double residual = 0.0;                   // ||B x - rhs||
  double condition = std::numeric_limits<double>::infinity();
  bool inconsistent = false;               // rhs has a component outside the range
  bool ball_violation = false;
  double ball_excess = 0.0;
  double time = 0.0;
};

inline constexpr double kBallFuzz = 1e-6;
inline constexpr double kResidualFloor = 1e-9;

namespace detail {

inline ReconstructionReport solve_info_system(const Eigen::Matrix3d& m,
                                              const Eigen::Vector3d& rhs, double rank_tol,
                                              double time) {
  if (!(rank_tol > 0.0))
    throw std::invalid_argument("reconstruct: tolerance must be positive");
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d& sv = svd.singularValues();
  ReconstructionReport rep;
  rep.time = time;
  const double cut = std::max(rank_tol * sv(0), kRankAbsoluteFloor);
  for (int i = 0; i < 3; ++i)
    if (sv(i) >= cut) ++rep.rank;
  rep.condition =
      sv(2) > 0.0 ? sv(0) / sv(2) : std::numeric_limits<double>::infinity();
  rep.classification = rep.rank == 3   ? TransferGrade::complete
                       : rep.rank == 0 ? TransferGrade::none
                                       : TransferGrade::partial;

  Eigen::Vector3d sol = Eigen::Vector3d::Zero();
  for (int i = 0; i < rep.rank; ++i)
    sol += (svd.matrixU().col(i).dot(rhs) / sv(i)) * svd.matrixV().col(i);
  rep.solution = sol;
  for (int i = rep.rank; i < 3; ++i) rep.nullspace.push_back(svd.matrixV().col(i));
  rep.residual = (m * sol - rhs).norm();
  rep.inconsistent = rep.residual > kResidualFloor * std::max(1.0, rhs.norm());

  if (rep.rank == 3) {
    BlochVector x{sol(0), sol(1), sol(2)};
    const double excess = x.ball_excess();
    rep.ball_excess = excess;
    if (excess > kBallFuzz) {
      rep.ball_violation = true;
    } else if (excess > 0.0) {
      // shave numerical dust back onto the ball surface
      const double u1 = 1.0 - 2.0 * x.x1, u2 = 2.0 * x.x2, u3 = 2.0 * x.x3;
      const double norm = std::sqrt(u1 * u1 + u2 * u2 + u3 * u3);
      x = BlochVector{(1.0 - u1 / norm) / 2.0, u2 / norm / 2.0, u3 / norm / 2.0};
    }
    rep.x = x;
  }
  return rep;
}

}  // namespace detail

inline ReconstructionReport reconstruct_from_polarizations(const PolarizationReadout& readout,
                                                           const BSystem& b,
                                                           double rank_tol = kDefaultRankTol) {
  return detail::solve_info_system(b.coeffs, readout.values - b.offset, rank_tol, b.time);
}

inline ReconstructionReport reconstruct_from_receiver(const DensityMatrix& rho,
                                                      const InfoSystem& sys,
                                                      double rank_tol = kDefaultRankTol) {
  if (rho.dimension() != 2)
    throw std::invalid_argument("reconstruct: one-qubit receiver state required");
  const Matrix& m = rho.data();
  const Eigen::Vector3d observed(m(0, 1).real(), m(0, 1).imag(), m(0, 0).real());
  return detail::solve_info_system(sys.coeffs, observed - sys.offset, rank_tol, sys.time);
}

// Deterministic Gaussian perturbation of the three readings.  Box-Muller over
// the raw engine output keeps the result identical across standard libraries
// for a fixed seed.
inline PolarizationReadout add_noise(const PolarizationReadout& readout, double sigma,
                                     std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma: need >= 0");
  if (sigma == 0.0) return readout;
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
  auto gaussian = [&] {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
  };
  PolarizationReadout out = readout;
  out.sigma = sigma;
  for (int n = 0; n < 3; ++n) out.values(n) += sigma * gaussian();
  return out;
}

inline nlohmann::json to_json(const ReconstructionReport& rep) {
  nlohmann::json j;
  j["classification"] = to_string(rep.classification);
  j["rank"] = rep.rank;
  if (rep.x)
    j["x"] = {rep.x->x1, rep.x->x2, rep.x->x3};
  else
    j["x"] = nullptr;
  j["solution_least_norm"] = {rep.solution(0), rep.solution(1), rep.solution(2)};
  nlohmann::json ns = nlohmann::json::array();
  for (const auto& v : rep.nullspace) ns.push_back({v(0), v(1), v(2)});
  j["nullspace"] = ns;
  j["residual"] = rep.residual;
  if (std::isfinite(rep.condition))
    j["condition_number"] = rep.condition;
  else
    j["condition_number"] = nullptr;
  j["inconsistent"] = rep.inconsistent;
  j["ball_violation"] = rep.ball_violation;
  j["ball_excess"] = rep.ball_excess;
  j["time"] = rep.time;
  j["time_unit"] = "1/D";
  return j;
}

}  // namespace spinchain
