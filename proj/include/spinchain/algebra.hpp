#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinchain/basis.hpp"
#include "spinchain/density.hpp"
#include "spinchain/types.hpp"

namespace spinchain {

// Kronecker product; the left factor owns the high-significance bits, so
// tensor_product(rho_1, rho_rest) places site 1 at the top of the label.
inline Matrix tensor_product(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw std::invalid_argument("tensor_product: square factors required");
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace detail {

// Scatter table: spreads the bits of a compact index over the register
// positions of the given (ascending) site list.
inline std::vector<Eigen::Index> scatter_table(const BasisConvention& basis,
                                               const std::vector<int>& sites_list) {
  const int k = static_cast<int>(sites_list.size());
  std::vector<Eigen::Index> table(std::size_t{1} << k, 0);
  for (Eigen::Index m = 0; m < static_cast<Eigen::Index>(table.size()); ++m) {
    Eigen::Index label = 0;
    for (int j = 0; j < k; ++j)
      if ((m >> (k - 1 - j)) & 1) label |= Eigen::Index{1} << basis.shift(sites_list[j]);
    table[m] = label;
  }
  return table;
}

}  // namespace detail

// Reduction onto the kept sites (1-based site numbers, any order; the output
// register keeps them in ascending site order).
inline Matrix partial_trace(const Matrix& rho, int sites, std::vector<int> keep) {
  const BasisConvention basis(sites);
  if (rho.rows() != basis.dimension() || rho.cols() != basis.dimension())
    throw std::invalid_argument("partial_trace: matrix does not match a " +
                                std::to_string(sites) + "-site register");
  if (keep.empty()) throw std::invalid_argument("partial_trace: nothing to keep");
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
    throw std::invalid_argument("partial_trace: duplicate site in keep set");
  for (int s : keep) basis.check_site(s);

  std::vector<int> traced;
  for (int s = 1; s <= sites; ++s)
    if (!std::binary_search(keep.begin(), keep.end(), s)) traced.push_back(s);

  const auto keep_scatter = detail::scatter_table(basis, keep);
  const auto trace_scatter = detail::scatter_table(basis, traced);

  const Eigen::Index dk = Eigen::Index{1} << keep.size();
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index i = 0; i < dk; ++i)
    for (Eigen::Index j = 0; j < dk; ++j) {
      Complex sum{0.0, 0.0};
      for (Eigen::Index r : trace_scatter) sum += rho(keep_scatter[i] | r, keep_scatter[j] | r);
      out(i, j) = sum;
    }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  return DensityMatrix(partial_trace(rho.data(), rho.sites(), keep), rho.mode());
}

}  // namespace spinchain
