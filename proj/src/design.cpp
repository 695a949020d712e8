#include "kbemu/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/random/sobol.hpp>

#include "kbemu/errors.hpp"

namespace kbemu {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, bound) by rejection.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

double solve_monotone(const std::function<double(double)>& f, double lo, double hi, double flo,
                      double fhi) {
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (a + b);
}

double signed_warp_integral(double offset, double theta, KernelFamily family) {
  const double v = warp_integral(std::abs(offset), theta, family);
  return offset < 0.0 ? -v : v;
}

}  // namespace

const char* to_string(DesignMethod method) {
  switch (method) {
    case DesignMethod::kLhc: return "lhc";
    case DesignMethod::kMaximinLhc: return "maximin";
    case DesignMethod::kWarpedLhc: return "warped-maximin";
    case DesignMethod::kGreedyVOpt: return "greedy-vopt";
    case DesignMethod::kWarpedGreedyVOpt: return "warped-greedy-vopt";
  }
  return "?";
}

DesignMethod design_method_from_string(const std::string& name) {
  for (auto m : {DesignMethod::kLhc, DesignMethod::kMaximinLhc, DesignMethod::kWarpedLhc,
                 DesignMethod::kGreedyVOpt, DesignMethod::kWarpedGreedyVOpt}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown design method '" + name + "'");
}

Design Design::rescaled(const Box& target) const {
  Design out = *this;
  out.points = target.from_unit(box.to_unit(points));
  out.box = target;
  return out;
}

void Design::validate() const {
  if (points.rows() < 1) throw InvalidParameter("design needs at least one point");
  box.validate();
  if (points.cols() != static_cast<Eigen::Index>(box.dim())) {
    throw ShapeError("design points and box differ in dimension");
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (!box.contains(points.row(i).transpose())) {
      throw DomainError("design point " + std::to_string(i) + " lies outside its box");
    }
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over a mix of both words
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Design latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw InvalidParameter("latin_hypercube needs n, d >= 1");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(perm[i], perm[uniform_index(rng, i + 1)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double v = (static_cast<double>(perm[i]) + uniform01(rng)) / static_cast<double>(n);
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return Design{std::move(pts), Box::unit(d), seed, DesignMethod::kLhc};
}

double min_pairwise_distance(const Eigen::MatrixXd& points) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      best = std::min(best, (points.row(i) - points.row(j)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

Design maximin_lhc(std::size_t n, std::size_t d, std::uint64_t seed, std::size_t num_candidates) {
  if (num_candidates == 0) throw InvalidParameter("maximin_lhc needs at least one candidate");
  Design best = latin_hypercube(n, d, seed);
  double best_d2 = std::pow(min_pairwise_distance(best.points), 2);
  for (std::size_t c = 1; c < num_candidates; ++c) {
    Design cand = latin_hypercube(n, d, derive_seed(seed, c));
    // Abandon a candidate as soon as it cannot beat the incumbent.
    double d2 = std::numeric_limits<double>::infinity();
    bool beaten = false;
    for (Eigen::Index i = 0; i < cand.points.rows() && !beaten; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        d2 = std::min(d2, (cand.points.row(i) - cand.points.row(j)).squaredNorm());
        if (d2 <= best_d2) {
          beaten = true;
          break;
        }
      }
    }
    if (!beaten && d2 > best_d2) {
      best = std::move(cand);
      best_d2 = d2;
    }
  }
  best.seed = seed;
  best.provenance = DesignMethod::kMaximinLhc;
  return best;
}

Eigen::MatrixXd sobol_pool(std::size_t size, const Box& box, std::uint64_t seed) {
  box.validate();
  const std::size_t d = box.dim();
  boost::random::sobol gen(d);
  std::mt19937_64 rng(seed);
  std::vector<double> shift(d);
  for (auto& s : shift) s = uniform01(rng);
  Eigen::MatrixXd unit(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double u = static_cast<double>(gen() >> 11) * 0x1.0p-53 + shift[j];
      if (u >= 1.0) u -= 1.0;
      unit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = u;
    }
  }
  return box.from_unit(unit);
}

// --- warping -----------------------------------------------------------------

namespace {
constexpr std::size_t kWarpPanels = 64;
using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
using PanelQuad = boost::math::quadrature::gauss<double, 30>;
}  // namespace

AxisWarp::AxisWarp(double lo, double hi, std::function<double(double)> profile,
                   std::function<double(double)> antiderivative)
    : lo_(lo), hi_(hi), profile_(std::move(profile)), antiderivative_(std::move(antiderivative)) {
  if (!(hi_ > lo_)) throw InvalidParameter("AxisWarp needs hi > lo");
  if (!antiderivative_) {
    panel_cdf_.assign(kWarpPanels + 1, 0.0);
    const double w = (hi_ - lo_) / kWarpPanels;
    for (std::size_t p = 0; p < kWarpPanels; ++p) {
      const double a = lo_ + w * static_cast<double>(p);
      panel_cdf_[p + 1] = panel_cdf_[p] + Quad::integrate(profile_, a, a + w, 10, 1e-14);
    }
  }
  total_ = 1.0;
  total_ = raw_cdf(1.0);
  if (!(total_ > 0.0)) throw DegenerateConfiguration("warp density integrates to zero");
}

double AxisWarp::raw_cdf(double u) const {
  const double t = lo_ + (hi_ - lo_) * u;
  if (antiderivative_) return antiderivative_(t) - antiderivative_(lo_);
  const double w = (hi_ - lo_) / kWarpPanels;
  auto p = static_cast<std::size_t>(std::floor(u * kWarpPanels));
  if (p >= kWarpPanels) return panel_cdf_.back();
  const double a = lo_ + w * static_cast<double>(p);
  if (t <= a) return panel_cdf_[p];
  // the profile is smooth on one panel, so a fixed rule is exact to round-off
  return panel_cdf_[p] + PanelQuad::integrate(profile_, a, t);
}

double AxisWarp::cdf(double u) const {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return raw_cdf(u) / total_;
}

double AxisWarp::warp(double u) const {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return solve_monotone([&](double v) { return cdf(v) - u; }, 0.0, 1.0, -u, 1.0 - u);
}

std::vector<std::pair<std::size_t, AxisWarp>> boundary_warps(const BoundaryConfig& boundaries,
                                                              const KernelSpec& kernel,
                                                              const Box& box,
                                                              bool use_quadrature) {
  std::vector<std::pair<std::size_t, AxisWarp>> out;
  const auto family = kernel.family;
  auto single_axis = [&](const AxisBoundary& b) {
    const auto j = static_cast<Eigen::Index>(b.axis());
    const double theta = kernel.theta(b.axis());
    const double loc = b.location();
    auto profile = [=](double t) {
      const double r = corr_1d(t - loc, theta, family);
      return 1.0 - r * r;
    };
    std::function<double(double)> primitive;
    if (!use_quadrature) {
      primitive = [=](double t) { return signed_warp_integral(t - loc, theta, family); };
    }
    out.emplace_back(b.axis(), AxisWarp(box.lower[j], box.upper[j], profile, primitive));
  };

  switch (boundaries.kind()) {
    case BoundaryKind::kNone:
      break;
    case BoundaryKind::kSingle:
      single_axis(boundaries.k());
      break;
    case BoundaryKind::kTwoPerpendicular:
      single_axis(boundaries.k());
      single_axis(boundaries.l());
      break;
    case BoundaryKind::kTwoParallel: {
      const AxisBoundary& k = boundaries.k();
      const AxisBoundary& l = boundaries.l();
      const auto j = static_cast<Eigen::Index>(k.axis());
      const double theta = kernel.theta(k.axis());
      const double kl = k.location();
      const double dir = l.location() > kl ? 1.0 : -1.0;
      const double c = boundaries.separation();
      const double slab_lo = std::min(kl, l.location());
      const double slab_hi = std::max(kl, l.location());
      if (box.lower[j] < slab_lo - 1e-12 || box.upper[j] > slab_hi + 1e-12) {
        throw DomainError("parallel-boundary warp needs the box inside the slab on that axis");
      }
      const double rc = corr_1d(c, theta, family);
      const double den = 1.0 - rc * rc;
      auto profile = [=](double t) {
        const double a = (t - kl) * dir;
        const double ra = corr_1d(a, theta, family);
        const double rb = corr_1d(c - a, theta, family);
        return (den - ra * ra - rb * rb + 2.0 * rc * ra * rb) / den;
      };
      out.emplace_back(k.axis(), AxisWarp(box.lower[j], box.upper[j], profile));
      break;
    }
  }
  return out;
}

Design warp_design(const Design& design, const BoundaryConfig& boundaries,
                   const KernelSpec& kernel, WarpRule rule) {
  design.validate();
  boundaries.check_dimension(design.dim());
  if (kernel.dim() != design.dim()) throw ShapeError("kernel and design differ in dimension");
  Design out = design;
  if (boundaries.empty()) return out;
  Eigen::MatrixXd unit = design.box.to_unit(design.points);

  if (rule == WarpRule::kInverseCdf) {
    for (const auto& [axis, w] : boundary_warps(boundaries, kernel, design.box)) {
      const auto j = static_cast<Eigen::Index>(axis);
      for (Eigen::Index i = 0; i < unit.rows(); ++i) unit(i, j) = w.warp(unit(i, j));
    }
  } else {
    if (boundaries.kind() == BoundaryKind::kTwoParallel) {
      throw InvalidParameter("scaled-inverse warp is defined for single/perpendicular boundaries");
    }
    for (const auto& b : boundaries.boundaries()) {
      const auto j = static_cast<Eigen::Index>(b.axis());
      const double width = design.box.upper[j] - design.box.lower[j];
      bool at_lower = b.location() == design.box.lower[j];
      bool at_upper = b.location() == design.box.upper[j];
      if (!at_lower && !at_upper) {
        throw InvalidParameter("scaled-inverse warp needs the boundary on a box face");
      }
      const double theta = kernel.theta(b.axis()) / width;
      auto g = [&](double y) {
        if (y <= 0.0) return 0.0;
        const double hi = y + theta * std::sqrt(std::numbers::pi / 8.0) + 1.0;
        return solve_monotone([&](double a) { return warp_integral(a, theta, kernel.family) - y; },
                              0.0, hi, -y, warp_integral(hi, theta, kernel.family) - y);
      };
      const double g1 = g(1.0);
      for (Eigen::Index i = 0; i < unit.rows(); ++i) {
        const double v = at_lower ? unit(i, j) : 1.0 - unit(i, j);
        const double w = std::clamp(g(v) / g1, 0.0, 1.0);
        unit(i, j) = at_lower ? w : 1.0 - w;
      }
    }
  }
  out.points = design.box.from_unit(unit);
  out.provenance = design.provenance == DesignMethod::kGreedyVOpt ? DesignMethod::kWarpedGreedyVOpt
                                                                  : DesignMethod::kWarpedLhc;
  return out;
}

// --- V-optimality ------------------------------------------------------------

CriterionGrid CriterionGrid::tensor(const Box& box, std::size_t resolution) {
  box.validate();
  if (resolution == 0) throw InvalidParameter("grid resolution must be >= 1");
  const std::size_t d = box.dim();
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (total > std::numeric_limits<std::size_t>::max() / resolution) {
      throw InvalidParameter("criterion grid too large");
    }
    total *= resolution;
  }
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(d));
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t m = 0; m < total; ++m) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double u = (static_cast<double>(idx[j]) + 0.5) / static_cast<double>(resolution);
      pts(static_cast<Eigen::Index>(m), jj) = box.lower[jj] + u * (box.upper[jj] - box.lower[jj]);
    }
    // row-major: last axis varies fastest
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < resolution) break;
      idx[j] = 0;
    }
  }
  return CriterionGrid{std::move(pts)};
}

std::size_t CriterionGrid::default_resolution(std::size_t dim, std::size_t max_points) {
  if (dim == 0) throw InvalidParameter("dimension must be >= 1");
  std::size_t r = 1;
  while (r < 30) {
    double total = std::pow(static_cast<double>(r + 1), static_cast<double>(dim));
    if (total > static_cast<double>(max_points)) break;
    ++r;
  }
  return r;
}

BoundaryConfig without_values(const BoundaryConfig& boundaries) {
  std::vector<AxisBoundary> stripped;
  for (const auto& b : boundaries.boundaries()) {
    stripped.emplace_back(b.axis(), b.location(), [](const Eigen::VectorXd&) { return 0.0; },
                          b.name());
  }
  return BoundaryConfig::from_list(std::move(stripped));
}

namespace {

AdjustedEmulator variance_emulator(const Eigen::MatrixXd& design_points, const PriorSpec& prior,
                                   const BoundaryConfig& boundaries, double jitter) {
  return AdjustedEmulator(prior, without_values(boundaries),
                          TrainingSet(design_points, Eigen::VectorXd::Zero(design_points.rows())),
                          jitter);
}

}  // namespace

TraceTerms v_criterion_terms(const Eigen::MatrixXd& design_points, const CriterionGrid& grid,
                             const PriorSpec& prior, const BoundaryConfig& boundaries,
                             double jitter) {
  const AdjustedEmulator em = variance_emulator(design_points, prior, boundaries, jitter);
  TraceTerms t{0.0, 0.0};
  for (Eigen::Index m = 0; m < grid.points.rows(); ++m) {
    const Eigen::VectorXd x = grid.points.row(m).transpose();
    t.boundary_trace += em.adjustment().variance(x);
    t.resolved_trace += em.resolved_variance(x);
  }
  return t;
}

double v_criterion(const Eigen::MatrixXd& design_points, const CriterionGrid& grid,
                   const PriorSpec& prior, const BoundaryConfig& boundaries, double jitter) {
  return std::max(0.0, v_criterion_terms(design_points, grid, prior, boundaries, jitter).value());
}

double v_criterion_direct(const Eigen::MatrixXd& design_points, const CriterionGrid& grid,
                          const PriorSpec& prior, const BoundaryConfig& boundaries,
                          double jitter) {
  const AdjustedEmulator em = variance_emulator(design_points, prior, boundaries, jitter);
  double total = 0.0;
  for (Eigen::Index m = 0; m < grid.points.rows(); ++m) {
    total += em.variance(grid.points.row(m).transpose());
  }
  return total;
}

namespace {

void refine(Eigen::MatrixXd& chosen, const CriterionGrid& grid, const PriorSpec& prior,
            const BoundaryConfig& boundaries, const Box& box, const GreedyOptions& options) {
  double current = v_criterion(chosen, grid, prior, boundaries, options.jitter);
  Eigen::VectorXd step = 0.1 * box.width();
  for (std::size_t sweep = 0; sweep < options.refine_sweeps; ++sweep) {
    bool improved = false;
    for (Eigen::Index i = 0; i < chosen.rows(); ++i) {
      for (Eigen::Index j = 0; j < chosen.cols(); ++j) {
        for (double sign : {1.0, -1.0}) {
          Eigen::MatrixXd trial = chosen;
          trial(i, j) = std::clamp(trial(i, j) + sign * step[j], box.lower[j], box.upper[j]);
          if (trial(i, j) == chosen(i, j)) continue;
          double value;
          try {
            value = v_criterion(trial, grid, prior, boundaries, options.jitter);
          } catch (const Error&) {
            continue;  // move onto a boundary or onto another point
          }
          if (value < current) {
            chosen = std::move(trial);
            current = value;
            improved = true;
            break;
          }
        }
      }
    }
    if (!improved) step *= 0.5;
  }
}

}  // namespace

Design greedy_v_optimal(std::size_t n, const CriterionGrid& grid, const Eigen::MatrixXd& pool,
                        const PriorSpec& prior, const BoundaryConfig& boundaries, const Box& box,
                        std::uint64_t seed, const GreedyOptions& options) {
  const Eigen::Index num_pool = pool.rows();
  if (num_pool == 0) throw InvalidParameter("candidate pool is empty");
  if (n == 0 || static_cast<Eigen::Index>(n) > num_pool) {
    throw InvalidParameter("greedy_v_optimal: n = " + std::to_string(n) +
                           " must be in [1, pool size = " + std::to_string(num_pool) + "]");
  }
  if (pool.cols() != static_cast<Eigen::Index>(prior.dim()) ||
      grid.points.cols() != pool.cols()) {
    throw ShapeError("pool, grid and prior differ in dimension");
  }
  const BoundaryConfig silent = without_values(boundaries);
  const BoundaryAdjustment adj(prior, silent);
  const Eigen::Index num_grid = grid.points.rows();

  std::vector<Eigen::VectorXd> grid_pts(static_cast<std::size_t>(num_grid));
  for (Eigen::Index m = 0; m < num_grid; ++m) grid_pts[static_cast<std::size_t>(m)] = grid.points.row(m).transpose();
  std::vector<Eigen::VectorXd> pool_pts(static_cast<std::size_t>(num_pool));
  for (Eigen::Index p = 0; p < num_pool; ++p) pool_pts[static_cast<std::size_t>(p)] = pool.row(p).transpose();

  // Cov_K between grid and pool never changes; cache it when it fits.
  const bool cache = static_cast<double>(num_grid) * static_cast<double>(num_pool) <= 3e7;
  Eigen::MatrixXd cross;
  if (cache) {
    cross.resize(num_grid, num_pool);
    for (Eigen::Index p = 0; p < num_pool; ++p) {
      for (Eigen::Index m = 0; m < num_grid; ++m) {
        cross(m, p) = adj.covariance(grid_pts[static_cast<std::size_t>(m)],
                                     pool_pts[static_cast<std::size_t>(p)]);
      }
    }
  }
  Eigen::VectorXd pool_var(num_pool);
  for (Eigen::Index p = 0; p < num_pool; ++p) pool_var[p] = adj.variance(pool_pts[static_cast<std::size_t>(p)]);

  std::vector<Eigen::Index> chosen_idx;
  std::vector<bool> taken(static_cast<std::size_t>(num_pool), false);
  Eigen::MatrixXd chosen(0, pool.cols());
  const double floor_var = 1e-12 * prior.sigma2;

  for (std::size_t step = 0; step < n; ++step) {
    // Whitened cross-covariances against the points chosen so far.
    Eigen::MatrixXd wg, wp;
    if (step > 0) {
      const AdjustedEmulator em(prior, silent,
                                TrainingSet(chosen, Eigen::VectorXd::Zero(chosen.rows())),
                                options.jitter);
      wg.resize(chosen.rows(), num_grid);
      for (Eigen::Index m = 0; m < num_grid; ++m) {
        wg.col(m) = em.whiten(em.cross_covariance(grid_pts[static_cast<std::size_t>(m)]));
      }
      wp.resize(chosen.rows(), num_pool);
      for (Eigen::Index p = 0; p < num_pool; ++p) {
        wp.col(p) = em.whiten(em.cross_covariance(pool_pts[static_cast<std::size_t>(p)]));
      }
    }

    Eigen::Index best = -1;
    double best_score = -1.0;
    Eigen::VectorXd col(num_grid);
    for (Eigen::Index p = 0; p < num_pool; ++p) {
      if (taken[static_cast<std::size_t>(p)]) continue;
      double cpp = pool_var[p];
      if (step > 0) cpp -= wp.col(p).squaredNorm();
      if (!(cpp > floor_var)) continue;
      if (cache) {
        col = cross.col(p);
      } else {
        for (Eigen::Index m = 0; m < num_grid; ++m) {
          col[m] = adj.covariance(grid_pts[static_cast<std::size_t>(m)],
                                  pool_pts[static_cast<std::size_t>(p)]);
        }
      }
      if (step > 0) col.noalias() -= wg.transpose() * wp.col(p);
      const double score = col.squaredNorm() / cpp;
      if (score > best_score) {
        best_score = score;
        best = p;
      }
    }
    if (best < 0) {
      throw InvalidParameter("no candidate in the pool carries remaining variance");
    }
    taken[static_cast<std::size_t>(best)] = true;
    chosen_idx.push_back(best);
    chosen.conservativeResize(chosen.rows() + 1, Eigen::NoChange);
    chosen.row(chosen.rows() - 1) = pool.row(best);
  }

  if (options.refine_sweeps > 0) refine(chosen, grid, prior, boundaries, box, options);

  return Design{std::move(chosen), box, seed, DesignMethod::kGreedyVOpt};
}

}  // namespace kbemu
