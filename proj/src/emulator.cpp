#include "kbemu/emulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include "kbemu/errors.hpp"

namespace kbemu {

namespace {

constexpr double kDuplicateTol = 1e-12;
constexpr double kNegativeVarianceTol = 1e-12;
constexpr double kMinParallelDenominator = 1e-14;
constexpr double kMinParallelSeparation = 1e-6;  // in units of theta

double max_abs_diff(const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// In-place lower Cholesky. Returns the index of the first non-positive
// pivot, or nothing on success.
std::optional<Eigen::Index> cholesky_in_place(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j) - a.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0) || !std::isfinite(pivot)) return j;
    const double ljj = std::sqrt(pivot);
    a(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      a(i, j) = (a(i, j) - a.row(i).head(j).dot(a.row(j).head(j))) / ljj;
    }
  }
  a.triangularView<Eigen::StrictlyUpper>().setZero();
  return std::nullopt;
}

}  // namespace

// --- PriorSpec, TrainingSet --------------------------------------------------

void PriorSpec::validate() const {
  kernel.validate();
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw InvalidParameter("prior variance sigma2 must be finite and positive");
  }
  if (!std::isfinite(beta)) throw InvalidParameter("prior mean beta must be finite");
}

TrainingSet::TrainingSet(std::size_t dim)
    : points_(0, static_cast<Eigen::Index>(dim)), values_(0) {}

TrainingSet::TrainingSet(Eigen::MatrixXd points, Eigen::VectorXd values)
    : points_(std::move(points)), values_(std::move(values)) {
  if (points_.rows() != values_.size()) {
    throw ShapeError("training set has " + std::to_string(points_.rows()) + " points but " +
                     std::to_string(values_.size()) + " values");
  }
  if (!points_.allFinite() || !values_.allFinite()) {
    throw InvalidParameter("training set contains non-finite entries");
  }
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (max_abs_diff(points_.row(i).transpose(), points_.row(j).transpose()) <=
          kDuplicateTol) {
        throw InvalidParameter("training points " + std::to_string(j) + " and " +
                               std::to_string(i) + " coincide");
      }
    }
  }
}

std::optional<Eigen::Index> TrainingSet::find(const Eigen::VectorXd& x, double tol) const {
  if (static_cast<std::size_t>(x.size()) != dim()) return std::nullopt;
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (max_abs_diff(points_.row(i).transpose(), x) <= tol) return i;
  }
  return std::nullopt;
}

TrainingSet TrainingSet::with_point(const Eigen::VectorXd& x, double value) const {
  Eigen::MatrixXd p(size() + 1, points_.cols());
  p.topRows(size()) = points_;
  p.row(size()) = x.transpose();
  Eigen::VectorXd v(size() + 1);
  v.head(size()) = values_;
  v[size()] = value;
  return TrainingSet(std::move(p), std::move(v));
}

void TrainingSet::check_inside(const Box& box) const {
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (!box.contains(points_.row(i).transpose())) {
      throw DomainError("training point " + std::to_string(i) + " lies outside the input box");
    }
  }
}

// --- BoundaryAdjustment ------------------------------------------------------

BoundaryAdjustment::BoundaryAdjustment(PriorSpec prior, BoundaryConfig boundaries)
    : prior_(std::move(prior)), boundaries_(std::move(boundaries)) {
  prior_.validate();
  boundaries_.check_dimension(prior_.dim());
  if (boundaries_.kind() == BoundaryKind::kTwoParallel) {
    const double theta = prior_.kernel.theta(boundaries_.k().axis());
    parallel_c_ = boundaries_.separation();
    if (parallel_c_ < kMinParallelSeparation * theta) {
      throw DegenerateConfiguration("parallel boundaries closer than 1e-6 theta");
    }
    const double rc = corr_1d(parallel_c_, theta, prior_.kernel.family);
    parallel_denominator_ = 1.0 - rc * rc;
    if (parallel_denominator_ < kMinParallelDenominator) {
      throw DegenerateConfiguration("parallel boundaries too close: 1 - r(c)^2 = " +
                                    std::to_string(parallel_denominator_));
    }
  }
}

void BoundaryAdjustment::check_point(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != prior_.dim()) {
    throw ShapeError("query point has dimension " + std::to_string(x.size()) +
                     ", emulator has " + std::to_string(prior_.dim()));
  }
}

BoundaryAdjustment::ParallelOffsets BoundaryAdjustment::parallel_offsets(
    const Eigen::VectorXd& x) const {
  const AxisBoundary& k = boundaries_.k();
  const AxisBoundary& l = boundaries_.l();
  const double dir = l.location() > k.location() ? 1.0 : -1.0;
  const double a = k.offset(x) * dir;
  const double b = -l.offset(x) * dir;
  const double tol = kDuplicateTol * std::max(1.0, parallel_c_);
  if (a < -tol || b < -tol) {
    std::ostringstream msg;
    msg << "point with x[" << k.axis() << "] = " << x[static_cast<Eigen::Index>(k.axis())]
        << " lies outside the slab between the parallel boundaries";
    throw DomainError(msg.str());
  }
  return {a, b};
}

double BoundaryAdjustment::mean(const Eigen::VectorXd& x) const {
  check_point(x);
  const double beta = prior_.beta;
  const auto family = prior_.kernel.family;
  switch (boundaries_.kind()) {
    case BoundaryKind::kNone:
      return beta;
    case BoundaryKind::kSingle: {
      const AxisBoundary& k = boundaries_.k();
      const double a = k.offset(x);
      if (a == 0.0) return k.evaluate(x);
      const double ra = corr_1d(a, prior_.kernel.theta(k.axis()), family);
      return beta + ra * (k.evaluate(k.project(x)) - beta);
    }
    case BoundaryKind::kTwoPerpendicular: {
      const AxisBoundary& k = boundaries_.k();
      const AxisBoundary& l = boundaries_.l();
      const double a = k.offset(x);
      const double b = l.offset(x);
      if (a == 0.0) return k.evaluate(x);
      if (b == 0.0) return l.evaluate(x);
      const double ra = corr_1d(a, prior_.kernel.theta(k.axis()), family);
      const double rb = corr_1d(b, prior_.kernel.theta(l.axis()), family);
      const Eigen::VectorXd xk = k.project(x);
      const Eigen::VectorXd xl = l.project(x);
      const Eigen::VectorXd xlk = k.project(xl);
      return beta + ra * (k.evaluate(xk) - beta) + rb * (l.evaluate(xl) - beta) -
             ra * rb * (k.evaluate(xlk) - beta);
    }
    case BoundaryKind::kTwoParallel: {
      const AxisBoundary& k = boundaries_.k();
      const AxisBoundary& l = boundaries_.l();
      const auto [a, b] = parallel_offsets(x);
      if (k.offset(x) == 0.0) return k.evaluate(x);
      if (l.offset(x) == 0.0) return l.evaluate(x);
      const double theta = prior_.kernel.theta(k.axis());
      const double ra = corr_1d(a, theta, family);
      const double rb = corr_1d(b, theta, family);
      const double rc = corr_1d(parallel_c_, theta, family);
      const double wk = (ra - rb * rc) / parallel_denominator_;
      const double wl = (rb - ra * rc) / parallel_denominator_;
      return beta + wk * (k.evaluate(k.project(x)) - beta) +
             wl * (l.evaluate(l.project(x)) - beta);
    }
  }
  throw MisuseError("unknown boundary configuration");
}

double BoundaryAdjustment::covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const {
  check_point(x);
  check_point(x2);
  const auto family = prior_.kernel.family;
  const double sigma2 = prior_.sigma2;
  switch (boundaries_.kind()) {
    case BoundaryKind::kNone:
      return prior_.covariance(x, x2);
    case BoundaryKind::kSingle: {
      const AxisBoundary& k = boundaries_.k();
      const double theta = prior_.kernel.theta(k.axis());
      const double big_r = updated_corr_component(k.offset(x), k.offset(x2), theta, family);
      if (big_r == 0.0) return 0.0;
      return sigma2 * big_r * corr_product(k.project(x), k.project(x2), prior_.kernel);
    }
    case BoundaryKind::kTwoPerpendicular: {
      const AxisBoundary& k = boundaries_.k();
      const AxisBoundary& l = boundaries_.l();
      const double r1 = updated_corr_component(k.offset(x), k.offset(x2),
                                               prior_.kernel.theta(k.axis()), family);
      const double r2 = updated_corr_component(l.offset(x), l.offset(x2),
                                               prior_.kernel.theta(l.axis()), family);
      if (r1 == 0.0 || r2 == 0.0) return 0.0;
      return sigma2 * r1 * r2 *
             corr_product(k.project(l.project(x)), k.project(l.project(x2)), prior_.kernel);
    }
    case BoundaryKind::kTwoParallel: {
      const AxisBoundary& k = boundaries_.k();
      const auto [a, b] = parallel_offsets(x);
      const auto [a2, b2] = parallel_offsets(x2);
      const double theta = prior_.kernel.theta(k.axis());
      const double ra = corr_1d(a, theta, family);
      const double rb = corr_1d(b, theta, family);
      const double ra2 = corr_1d(a2, theta, family);
      const double rb2 = corr_1d(b2, theta, family);
      const double rc = corr_1d(parallel_c_, theta, family);
      // Written in the form that is manifestly symmetric under K <-> L.
      const double bracket = corr_1d(a - a2, theta, family) * parallel_denominator_ -
                             ra * ra2 - rb * rb2 + rc * (ra * rb2 + rb * ra2);
      if (bracket == 0.0) return 0.0;
      return sigma2 * corr_product(k.project(x), k.project(x2), prior_.kernel) * bracket /
             parallel_denominator_;
    }
  }
  throw MisuseError("unknown boundary configuration");
}

double BoundaryAdjustment::variance(const Eigen::VectorXd& x) const {
  return std::max(0.0, covariance(x, x));
}

double boundary_mean(const Eigen::VectorXd& x, const PriorSpec& prior,
                     const BoundaryConfig& boundaries) {
  if (boundaries.empty()) throw MisuseError("boundary_mean needs at least one boundary");
  return BoundaryAdjustment(prior, boundaries).mean(x);
}

double boundary_cov(const Eigen::VectorXd& x, const Eigen::VectorXd& x2, const PriorSpec& prior,
                    const BoundaryConfig& boundaries) {
  if (boundaries.empty()) throw MisuseError("boundary_cov needs at least one boundary");
  return BoundaryAdjustment(prior, boundaries).covariance(x, x2);
}

// --- AdjustedEmulator --------------------------------------------------------

AdjustedEmulator::AdjustedEmulator(PriorSpec prior, BoundaryConfig boundaries,
                                   TrainingSet training, double jitter)
    : adjustment_(std::move(prior), std::move(boundaries)), training_(std::move(training)) {
  if (!(jitter >= 0.0) || !std::isfinite(jitter)) {
    throw InvalidParameter("jitter must be finite and nonnegative");
  }
  const Eigen::Index n = training_.size();
  if (n > 0 && training_.dim() != this->prior().dim()) {
    throw ShapeError("training points have dimension " + std::to_string(training_.dim()) +
                     ", prior has " + std::to_string(this->prior().dim()));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = training_.point(i);
    for (const auto& b : this->boundaries().boundaries()) {
      if (std::abs(b.offset(xi)) <= kDuplicateTol) {
        throw InvalidParameter("training point " + std::to_string(i) +
                               " lies on known boundary '" + b.name() +
                               "'; use the boundary evaluator there instead");
      }
    }
  }

  Eigen::MatrixXd gram(n, n);
  Eigen::VectorXd residual(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = training_.point(i);
    residual[i] = training_.values()[i] - adjustment_.mean(xi);
    for (Eigen::Index j = 0; j <= i; ++j) {
      gram(i, j) = adjustment_.covariance(xi, training_.point(j));
      gram(j, i) = gram(i, j);
    }
  }

  const double sigma2 = this->prior().sigma2;
  double level = jitter;
  std::optional<Eigen::Index> failed_pivot;
  while (true) {
    factor_ = gram;
    factor_.diagonal().array() += level * sigma2;
    failed_pivot = cholesky_in_place(factor_);
    if (!failed_pivot) break;
    const double next = level == 0.0 ? kDefaultJitter : level * 10.0;
    if (next > kMaxJitter * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "Var_K[D] is not positive definite: pivot " << *failed_pivot
          << " failed with jitter " << level << " (training point " << *failed_pivot << ")";
      throw ConditioningError(msg.str());
    }
    level = next;
  }
  jitter_ = level;
  weights_ = residual;
  if (n > 0) {
    factor_.triangularView<Eigen::Lower>().solveInPlace(weights_);
    factor_.triangularView<Eigen::Lower>().transpose().solveInPlace(weights_);
  }
}

Eigen::VectorXd AdjustedEmulator::cross_covariance(const Eigen::VectorXd& x) const {
  Eigen::VectorXd k(training_.size());
  for (Eigen::Index i = 0; i < training_.size(); ++i) {
    k[i] = adjustment_.covariance(x, training_.point(i));
  }
  return k;
}

Eigen::VectorXd AdjustedEmulator::whiten(const Eigen::VectorXd& v) const {
  Eigen::VectorXd w = v;
  if (w.size() > 0) factor_.triangularView<Eigen::Lower>().solveInPlace(w);
  return w;
}

double AdjustedEmulator::resolved_variance(const Eigen::VectorXd& x) const {
  if (training_.empty()) return 0.0;
  return whiten(cross_covariance(x)).squaredNorm();
}

double AdjustedEmulator::clip_variance(double v) const {
  if (v >= 0.0) return v;
  if (v >= -kNegativeVarianceTol * prior().sigma2) return 0.0;
  std::ostringstream msg;
  msg << "adjusted variance " << v << " is negative beyond round-off";
  throw NumericalConsistencyError(msg.str());
}

double AdjustedEmulator::mean(const Eigen::VectorXd& x) const {
  if (auto hit = training_.find(x)) return training_.values()[*hit];
  const double m = adjustment_.mean(x);
  if (training_.empty()) return m;
  return m + cross_covariance(x).dot(weights_);
}

double AdjustedEmulator::variance(const Eigen::VectorXd& x) const {
  if (training_.find(x)) return 0.0;
  return clip_variance(adjustment_.covariance(x, x) - resolved_variance(x));
}

double AdjustedEmulator::covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const {
  if (training_.find(x) || training_.find(x2)) return 0.0;
  const double prior_part = adjustment_.covariance(x, x2);
  if (training_.empty()) return x == x2 ? clip_variance(prior_part) : prior_part;
  const double c = prior_part - whiten(cross_covariance(x)).dot(whiten(cross_covariance(x2)));
  return x == x2 ? clip_variance(c) : c;
}

AdjustedEmulator build_adjusted(PriorSpec prior, BoundaryConfig boundaries, TrainingSet training,
                                double jitter) {
  return AdjustedEmulator(std::move(prior), std::move(boundaries), std::move(training), jitter);
}

// --- black-box augmentation and the brute-force reference ---------------------

namespace {

class AugmentedBuilder {
 public:
  void add(const Eigen::VectorXd& p, double value) {
    for (const auto& q : points_) {
      if (max_abs_diff(p, q) <= kDuplicateTol) return;
    }
    points_.push_back(p);
    values_.push_back(value);
  }

  void add_projections(const Eigen::VectorXd& x, const BoundaryConfig& boundaries) {
    switch (boundaries.kind()) {
      case BoundaryKind::kNone:
        throw MisuseError("black-box augmentation needs at least one boundary");
      case BoundaryKind::kSingle: {
        const Eigen::VectorXd xk = boundaries.k().project(x);
        add(xk, boundaries.k().evaluate(xk));
        break;
      }
      case BoundaryKind::kTwoPerpendicular: {
        const AxisBoundary& k = boundaries.k();
        const AxisBoundary& l = boundaries.l();
        const Eigen::VectorXd xk = k.project(x);
        const Eigen::VectorXd xl = l.project(x);
        const Eigen::VectorXd xlk = k.project(xl);
        add(xk, k.evaluate(xk));
        add(xl, l.evaluate(xl));
        add(xlk, k.evaluate(xlk));
        break;
      }
      case BoundaryKind::kTwoParallel: {
        const Eigen::VectorXd xk = boundaries.k().project(x);
        const Eigen::VectorXd xl = boundaries.l().project(x);
        add(xk, boundaries.k().evaluate(xk));
        add(xl, boundaries.l().evaluate(xl));
        break;
      }
    }
  }

  AugmentedSet finish(Eigen::Index dim) const {
    AugmentedSet out{Eigen::MatrixXd(static_cast<Eigen::Index>(points_.size()), dim),
                     Eigen::VectorXd(static_cast<Eigen::Index>(values_.size()))};
    for (std::size_t i = 0; i < points_.size(); ++i) {
      out.points.row(static_cast<Eigen::Index>(i)) = points_[i].transpose();
      out.values[static_cast<Eigen::Index>(i)] = values_[i];
    }
    return out;
  }

 private:
  std::vector<Eigen::VectorXd> points_;
  std::vector<double> values_;
};

}  // namespace

AugmentedSet blackbox_augmented_points(const TrainingSet& training,
                                       std::span<const Eigen::VectorXd> queries,
                                       const BoundaryConfig& boundaries) {
  if (boundaries.empty()) {
    throw MisuseError("black-box augmentation needs at least one boundary");
  }
  Eigen::Index dim = static_cast<Eigen::Index>(training.dim());
  if (training.empty() && !queries.empty()) dim = queries.front().size();
  AugmentedBuilder builder;
  for (Eigen::Index i = 0; i < training.size(); ++i) {
    builder.add(training.point(i), training.values()[i]);
  }
  for (Eigen::Index i = 0; i < training.size(); ++i) {
    builder.add_projections(training.point(i), boundaries);
  }
  for (const auto& x : queries) builder.add_projections(x, boundaries);
  return builder.finish(dim);
}

AugmentedSet blackbox_augmented_points(const TrainingSet& training, const Eigen::VectorXd& x,
                                       const BoundaryConfig& boundaries) {
  return blackbox_augmented_points(training, std::span<const Eigen::VectorXd>(&x, 1),
                                   boundaries);
}

BruteForceBatch brute_force_batch(const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
                                  const PriorSpec& prior, const Eigen::MatrixXd& queries,
                                  double jitter, Eigen::Index jittered_rows) {
  using Real = boost::multiprecision::cpp_bin_float_50;
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  using std::exp;

  prior.validate();
  const Eigen::Index m = points.rows();
  const Eigen::Index q = queries.rows();
  const auto d = static_cast<Eigen::Index>(prior.dim());
  if (values.size() != m) throw ShapeError("brute_force_update: points/values length mismatch");
  if ((m > 0 && points.cols() != d) || (q > 0 && queries.cols() != d)) {
    throw ShapeError("brute_force_update: dimension mismatch");
  }
  if (jitter < 0.0) throw InvalidParameter("brute_force_update: jitter must be nonnegative");
  if (jittered_rows < 0 || jittered_rows > m) jittered_rows = m;

  std::vector<Real> inv_theta(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) inv_theta[k] = 1 / Real(prior.kernel.thetas[k]);
  auto corr = [&](const auto& p, const auto& r) -> Real {
    Real s = 0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const Real z = (Real(p[k]) - Real(r[k])) * inv_theta[k];
      s += z * z;
    }
    return exp(-s);
  };
  const Real sigma2 = prior.sigma2;
  const Real beta = prior.beta;

  Mat gram(m, m), cross(m, q);
  Vec resid(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      gram(i, j) = sigma2 * corr(points.row(i), points.row(j));
      gram(j, i) = gram(i, j);
    }
    gram(i, i) = sigma2 * (i < jittered_rows ? 1 + Real(jitter) : Real(1));
    for (Eigen::Index k = 0; k < q; ++k) cross(i, k) = sigma2 * corr(points.row(i), queries.row(k));
    resid[i] = Real(values[i]) - beta;
  }

  Mat white(m, q);
  Vec alpha(m);
  if (m > 0) {
    Eigen::LLT<Mat> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw ConditioningError("brute_force_update: Gram matrix of " + std::to_string(m) +
                              " points is not numerically positive definite");
    }
    alpha = llt.solve(resid);
    white = llt.matrixL().solve(cross);
  }

  BruteForceBatch out;
  out.mean.resize(q);
  out.covariance.resize(q, q);
  for (Eigen::Index k = 0; k < q; ++k) {
    out.mean[k] = static_cast<double>(beta + cross.col(k).dot(alpha));
    for (Eigen::Index l = 0; l <= k; ++l) {
      const Real c = sigma2 * corr(queries.row(k), queries.row(l)) - white.col(k).dot(white.col(l));
      out.covariance(k, l) = out.covariance(l, k) = static_cast<double>(c);
    }
  }
  return out;
}

BruteForceResult brute_force_update(const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
                                    const PriorSpec& prior, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& x2, double jitter,
                                    Eigen::Index jittered_rows) {
  if (x.size() != x2.size()) throw ShapeError("brute_force_update: query dimension mismatch");
  Eigen::MatrixXd queries(2, x.size());
  queries.row(0) = x.transpose();
  queries.row(1) = x2.transpose();
  const BruteForceBatch b = brute_force_batch(points, values, prior, queries, jitter, jittered_rows);
  return {b.mean[0], b.covariance(0, 0), b.covariance(0, 1)};
}

}  // namespace kbemu
