#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "spinchain/transfer.hpp"

namespace spinchain {

struct ScanOptions {
  double det_tol = kDefaultDetTol;
  double rank_tol = kDefaultRankTol;
  double pst_tol = kDefaultPstTol;
  int workers = 1;    // 0 = hardware concurrency
  bool refine = true; // locate singular/transfer instants between grid points
};

struct ScanPoint {
  double t = 0.0;
  double det_a = 0.0;
  int rank = 0;
  double condition = 0.0;
  TransferGrade classification = TransferGrade::none;
  bool near_singular = true;
  bool pst_exact = false;
  bool pst_local = false;
  double pst_residual = 0.0;
};

struct PstInstant {
  double t = 0.0;
  double residual = 0.0;
  bool exact = false;
};

struct ScanResult {
  std::vector<ScanPoint> points;
  std::vector<double> singular_instants;  // refined |det A| zeros
  std::vector<PstInstant> pst_instants;   // refined (local-unitary) identity-map instants
  ScanOptions options;
};

namespace detail {

// Index-sharded loop; results must be written by index so the worker count
// never changes the outcome.  The first exception wins and stops the pool.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  int w = workers == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : workers;
  if (w < 1) w = 1;
  w = std::min<std::size_t>(w, n) == 0 ? 1 : static_cast<int>(std::min<std::size_t>(w, n));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        stop.store(true);
        break;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int i = 0; i < w; ++i) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Golden-section minimization; f need not be differentiable (|det| has
// kinks at sign changes).
inline std::pair<double, double> golden_min(const std::function<double(double)>& f, double a,
                                            double b) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 90 && (b - a) > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (f1 <= f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

inline double bisect_root(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 200 && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fa < 0.0) == (fm < 0.0)) {
      a = m; fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

inline void merge_sorted_instants(std::vector<double>& xs, double spacing) {
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  for (double x : xs)
    if (out.empty() || x - out.back() > spacing) out.push_back(x);
  xs = std::move(out);
}

}  // namespace detail

// Diagnostics over a strictly increasing time grid: determinant, rank and
// condition number of the information system plus transfer-instant flags at
// every point.  Grid points are independent and fan out over the worker pool;
// between-point refinement then pins the singular instants (local minima of
// |det A| and sign crossings) and the state-transfer instants (local minima
// of the map residual).
inline ScanResult scan_time(const ChainSpec& spec, const DensityMatrix& rest,
                            const std::vector<double>& grid, const ScanOptions& options = {}) {
  if (grid.empty()) throw std::invalid_argument("scan: empty time grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("scan: time grid must be strictly increasing");

  const Propagator prop = Propagator::diagonalize(build_xy_hamiltonian(spec));
  const TransferProbe probe(spec, rest, prop);

  ScanResult result;
  result.options = options;
  result.points.resize(grid.size());
  detail::parallel_for(grid.size(), options.workers, [&](std::size_t i) {
    const TransferMatrix tm = probe.at(grid[i]);
    const TransferClass cls = classify(compute_info_system(tm), options.det_tol, options.rank_tol);
    const PstCheck pst = pst_check(tm, options.pst_tol);
    result.points[i] = ScanPoint{grid[i],   cls.det,   cls.rank,
                                 cls.condition, cls.classification, cls.near_singular,
                                 pst.exact, pst.local_unitary, pst.local_residual};
  });

  if (!options.refine || grid.size() < 2) return result;

  const auto det_at = [&](double t) {
    return compute_info_system(probe.at(t)).coeffs.determinant();
  };
  const auto abs_det = [&](double t) { return std::abs(det_at(t)); };
  const auto pst_res = [&](double t) { return pst_check(probe.at(t), options.pst_tol).local_residual; };

  const std::size_t n = grid.size();
  const double span = grid.back() - grid.front();
  const double merge_spacing = 1e-6 * span;
  // Grid minima further than this factor above the tolerance cannot dip below
  // it between points for any smoothly vanishing quantity; skipping them keeps
  // long scans from golden-searching every shallow oscillation.
  constexpr double kRefineTriggerFactor = 1e6;
  const double det_trigger = options.det_tol * kRefineTriggerFactor;
  const double pst_trigger = options.pst_tol * kRefineTriggerFactor;

  // |det| minima and det sign changes -> singular instants.
  std::vector<double> singulars;
  for (std::size_t i = 0; i < n; ++i) {
    const double di = std::abs(result.points[i].det_a);
    if (di >= det_trigger) continue;
    const bool left_ok = i == 0 || di <= std::abs(result.points[i - 1].det_a);
    const bool right_ok = i + 1 == n || di <= std::abs(result.points[i + 1].det_a);
    if (!(left_ok && right_ok)) continue;
    const double lo = i == 0 ? grid[i] : grid[i - 1];
    const double hi = i + 1 == n ? grid[i] : grid[i + 1];
    double t_min = grid[i], f_min = di;
    if (hi > lo) {
      const auto [tm, fm] = detail::golden_min(abs_det, lo, hi);
      if (fm < f_min) { t_min = tm; f_min = fm; }
    }
    if (f_min < options.det_tol) singulars.push_back(t_min);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = result.points[i].det_a, b = result.points[i + 1].det_a;
    if ((a < 0.0) != (b < 0.0) && a != 0.0 && b != 0.0)
      singulars.push_back(detail::bisect_root(det_at, grid[i], grid[i + 1]));
  }
  detail::merge_sorted_instants(singulars, merge_spacing);
  result.singular_instants = std::move(singulars);

  // Residual minima -> state-transfer instants.
  std::vector<double> pst_times;
  for (std::size_t i = 0; i < n; ++i) {
    const double ri = result.points[i].pst_residual;
    if (ri >= pst_trigger) continue;
    const bool left_ok = i == 0 || ri <= result.points[i - 1].pst_residual;
    const bool right_ok = i + 1 == n || ri <= result.points[i + 1].pst_residual;
    if (!(left_ok && right_ok)) continue;
    const double lo = i == 0 ? grid[i] : grid[i - 1];
    const double hi = i + 1 == n ? grid[i] : grid[i + 1];
    double t_min = grid[i], f_min = ri;
    if (hi > lo) {
      const auto [tm, fm] = detail::golden_min(pst_res, lo, hi);
      if (fm < f_min) { t_min = tm; f_min = fm; }
    }
    if (f_min < options.pst_tol) pst_times.push_back(t_min);
  }
  detail::merge_sorted_instants(pst_times, merge_spacing);
  for (double t : pst_times) {
    const PstCheck chk = pst_check(probe.at(t), options.pst_tol);
    result.pst_instants.push_back(PstInstant{t, chk.local_residual, chk.exact});
  }
  return result;
}

inline std::vector<double> linear_grid(double t_min, double t_max, int points) {
  if (points < 2) throw std::invalid_argument("grid: need at least 2 points");
  if (!(t_min < t_max)) throw std::invalid_argument("grid: t_min must be below t_max");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    grid[static_cast<std::size_t>(i)] = t_min + (t_max - t_min) * i / (points - 1);
  return grid;
}

// Fixed column set; %.17g keeps the values round-trip exact and the file
// byte-reproducible.
inline std::string to_csv(const ScanResult& result) {
  std::string out = "t,detA,rank,cond,pst_exact,pst_local\n";
  char line[160];
  for (const ScanPoint& p : result.points) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%d,%.17g,%d,%d\n", p.t, p.det_a, p.rank,
                  p.condition, p.pst_exact ? 1 : 0, p.pst_local ? 1 : 0);
    out += line;
  }
  return out;
}

inline nlohmann::json to_json(const ScanResult& result) {
  nlohmann::json points = nlohmann::json::array();
  for (const ScanPoint& p : result.points)
    points.push_back({{"t", p.t},
                      {"detA", p.det_a},
                      {"rank", p.rank},
                      {"cond", p.condition},
                      {"classification", to_string(p.classification)},
                      {"near_singular", p.near_singular},
                      {"pst_exact", p.pst_exact},
                      {"pst_local", p.pst_local},
                      {"pst_residual", p.pst_residual}});
  nlohmann::json insts = nlohmann::json::array();
  for (const PstInstant& p : result.pst_instants)
    insts.push_back({{"t", p.t}, {"residual", p.residual}, {"exact", p.exact}});
  return nlohmann::json{{"time_unit", "1/D"},
                        {"points", points},
                        {"singular_instants", result.singular_instants},
                        {"pst_instants", insts},
                        {"tolerances",
                         {{"det", result.options.det_tol},
                          {"rank", result.options.rank_tol},
                          {"pst", result.options.pst_tol}}}};
}

}  // namespace spinchain
