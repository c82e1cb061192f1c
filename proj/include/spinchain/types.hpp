#pragma once

#include <complex>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spinchain {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kImag{0.0, 1.0};

// Dense-representation cap: registers larger than 2^12 are rejected.
inline constexpr int kMaxSites = 12;

// Thrown when a numerical routine violates its own accuracy contract
// (failed eigensolve, propagator reconstruction drift, broken map
// invariants).  Bad inputs throw std::invalid_argument instead.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}

// FNV-1a over the raw matrix bytes; used to tag a propagator with the
// Hamiltonian it was built from.
inline std::uint64_t fingerprint(const Matrix& m) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) h = (h ^ c[i]) * 1099511628211ull;
  };
  const Eigen::Index rows = m.rows(), cols = m.cols();
  mix(&rows, sizeof(rows));
  mix(&cols, sizeof(cols));
  mix(m.data(), sizeof(Complex) * static_cast<std::size_t>(m.size()));
  return h;
}

}  // namespace detail

}  // namespace spinchain
