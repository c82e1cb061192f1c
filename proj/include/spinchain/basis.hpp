#pragma once

#include <stdexcept>
#include <string>

#include "spinchain/types.hpp"

namespace spinchain {

// Index convention for an N-site spin-1/2 register: site 1 owns the most
// significant bit, so a basis label reads b = sum_i alpha_i * 2^(N-i) with
// alpha_i in {0,1} the state of site i.
struct BasisConvention {
  int sites;

  explicit BasisConvention(int n) : sites(n) {
    if (n < 1 || n > kMaxSites)
      throw std::invalid_argument("sites: need 1.." + std::to_string(kMaxSites) +
                                  ", got " + std::to_string(n));
  }

  Eigen::Index dimension() const { return Eigen::Index{1} << sites; }

  void check_site(int site) const {
    if (site < 1 || site > sites)
      throw std::invalid_argument("site: need 1.." + std::to_string(sites) +
                                  ", got " + std::to_string(site));
  }

  // Bit position (weight exponent) of a site within a basis label.
  int shift(int site) const {
    check_site(site);
    return sites - site;
  }

  int bit(Eigen::Index label, int site) const {
    return static_cast<int>((label >> shift(site)) & 1);
  }

  Eigen::Index with_bit(Eigen::Index label, int site, int value) const {
    const Eigen::Index mask = Eigen::Index{1} << shift(site);
    return value ? (label | mask) : (label & ~mask);
  }
};

// Single-qubit basis kets |0> = (1,0)^T, |1> = (0,1)^T.
inline Eigen::Vector2cd qubit_ket(int a) {
  if (a != 0 && a != 1) throw std::invalid_argument("qubit_ket: label must be 0 or 1");
  Eigen::Vector2cd v = Eigen::Vector2cd::Zero();
  v(a) = 1.0;
  return v;
}

// Matrix unit E_ab = |a><b|.
inline Matrix2 matrix_unit(int a, int b) {
  Matrix2 m = Matrix2::Zero();
  m(a, b) = 1.0;
  return m;
}

// Spin-1/2 operators: I_z = diag(1/2,-1/2), I+ = |0><1|, I- = |1><0|,
// I_x and I_y the Pauli halves, so I+- = I_x +- i I_y exactly.
inline Matrix2 spin_plus() { return matrix_unit(0, 1); }
inline Matrix2 spin_minus() { return matrix_unit(1, 0); }

inline Matrix2 spin_z() {
  Matrix2 m = Matrix2::Zero();
  m(0, 0) = 0.5;
  m(1, 1) = -0.5;
  return m;
}

inline Matrix2 spin_x() { return 0.5 * (spin_plus() + spin_minus()); }
inline Matrix2 spin_y() { return -0.5 * kImag * (spin_plus() - spin_minus()); }

enum class SpinComponent { plus, minus, x, y, z };

inline Matrix2 spin_component(SpinComponent kind) {
  switch (kind) {
    case SpinComponent::plus: return spin_plus();
    case SpinComponent::minus: return spin_minus();
    case SpinComponent::x: return spin_x();
    case SpinComponent::y: return spin_y();
    case SpinComponent::z: return spin_z();
  }
  throw std::invalid_argument("spin_component: unknown kind");
}

}  // namespace spinchain
