#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinchain/algebra.hpp"
#include "spinchain/basis.hpp"
#include "spinchain/types.hpp"

namespace spinchain {

// Open spin-1/2 chain with uniform nearest-neighbor coupling, optional
// per-site Larmor frequencies and an optional inverse temperature for the
// thermal rest state.  Site 1 is the sender, the last site (by default) the
// receiver; times are reported in units of 1/coupling.
struct ChainSpec {
  int sites = 0;
  double coupling = 1.0;
  std::vector<double> larmor;  // per-site frequencies; empty means all zero
  std::optional<double> beta;  // inverse temperature (dimensionless when D = 1)
  int sender = 1;
  int receiver = 0;  // 0 means "last site"

  ChainSpec() = default;
  explicit ChainSpec(int n) : sites(n), larmor(static_cast<std::size_t>(n), 0.0), receiver(n) {}

  int receiver_site() const { return receiver == 0 ? sites : receiver; }

  double larmor_at(int site) const {
    if (larmor.empty()) return 0.0;
    return larmor.at(static_cast<std::size_t>(site) - 1);
  }

  void validate() const {
    if (sites < 2 || sites > kMaxSites)
      throw std::invalid_argument("sites: need 2.." + std::to_string(kMaxSites) + ", got " +
                                  std::to_string(sites));
    if (!std::isfinite(coupling))
      throw std::invalid_argument("coupling: must be finite");
    if (!larmor.empty() && static_cast<int>(larmor.size()) != sites)
      throw std::invalid_argument("larmor: need one frequency per site (" +
                                  std::to_string(sites) + "), got " +
                                  std::to_string(larmor.size()));
    for (double w : larmor)
      if (!std::isfinite(w)) throw std::invalid_argument("larmor: must be finite");
    if (sender != 1)
      throw std::invalid_argument(
          "sender: only site 1 is supported (the rest state covers sites 2..N)");
    const int r = receiver_site();
    if (r < 1 || r > sites)
      throw std::invalid_argument("receiver: need 1.." + std::to_string(sites) + ", got " +
                                  std::to_string(r));
    if (r == sender) throw std::invalid_argument("receiver: must differ from the sender");
    if (beta && !(*beta >= 0.0))
      throw std::invalid_argument("beta: need >= 0, got " + std::to_string(*beta));
  }

  // Non-fatal diagnostics.
  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    if (!larmor.empty() && larmor_at(1) != 0.0)
      out.push_back("larmor[1] = " + std::to_string(larmor_at(1)) +
                    " is ignored: the rest Hamiltonian carries no sender Zeeman term");
    if (coupling == 0.0) out.push_back("coupling = 0: the chain does not propagate anything");
    return out;
  }
};

namespace detail {

// Flip-flop chain on n sites plus optional Zeeman terms, built entry-wise:
// every neighboring |01>/|10> pair is connected with amplitude -D/2, and
// site i contributes omega_i * (+1/2 or -1/2) on the diagonal.
inline Matrix chain_hamiltonian(int n, double coupling, const std::vector<double>& omegas) {
  const BasisConvention basis(n);
  const Eigen::Index d = basis.dimension();
  Matrix h = Matrix::Zero(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    for (int i = 1; i < n; ++i) {
      const int ai = basis.bit(b, i);
      const int aj = basis.bit(b, i + 1);
      if (ai != aj) {
        const Eigen::Index b2 = basis.with_bit(basis.with_bit(b, i, aj), i + 1, ai);
        h(b2, b) += Complex{-0.5 * coupling, 0.0};
      }
    }
    if (!omegas.empty()) {
      double diag = 0.0;
      for (int i = 1; i <= n; ++i)
        diag += omegas[static_cast<std::size_t>(i) - 1] * (basis.bit(b, i) == 0 ? 0.5 : -0.5);
      h(b, b) += Complex{diag, 0.0};
    }
  }
  return h;
}

}  // namespace detail

// Full-register XY Hamiltonian; commutes with the total z-magnetization.
inline Matrix build_xy_hamiltonian(const ChainSpec& spec) {
  spec.validate();
  return detail::chain_hamiltonian(spec.sites, spec.coupling, {});
}

// Rest Hamiltonian on sites 2..N as an (N-1)-site register of its own:
// the XY sub-chain plus the Zeeman terms of sites 2..N.
inline Matrix build_rest_hamiltonian_reduced(const ChainSpec& spec) {
  spec.validate();
  std::vector<double> omegas(static_cast<std::size_t>(spec.sites) - 1, 0.0);
  for (int i = 2; i <= spec.sites; ++i)
    omegas[static_cast<std::size_t>(i) - 2] = spec.larmor_at(i);
  return detail::chain_hamiltonian(spec.sites - 1, spec.coupling, omegas);
}

// Same operator embedded in the full register, identity on the sender site.
inline Matrix build_rest_hamiltonian(const ChainSpec& spec) {
  return tensor_product(Matrix::Identity(2, 2), build_rest_hamiltonian_reduced(spec));
}

// Single-site spin operator embedded by identity factors.
inline Matrix site_operator(const ChainSpec& spec, int site, SpinComponent kind) {
  const BasisConvention basis(spec.sites);
  basis.check_site(site);
  const Matrix2 op = spin_component(kind);
  const Eigen::Index d = basis.dimension();
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    const int a = basis.bit(b, site);
    for (int a2 = 0; a2 < 2; ++a2) {
      const Complex c = op(a2, a);
      if (c != Complex{0.0, 0.0}) out(basis.with_bit(b, site, a2), b) += c;
    }
  }
  return out;
}

// Total z-magnetization, the conserved charge of the XY chain.
inline Matrix total_magnetization(const ChainSpec& spec) {
  const BasisConvention basis(spec.sites);
  const Eigen::Index d = basis.dimension();
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    double m = 0.0;
    for (int i = 1; i <= spec.sites; ++i) m += basis.bit(b, i) == 0 ? 0.5 : -0.5;
    out(b, b) = Complex{m, 0.0};
  }
  return out;
}

}  // namespace spinchain
