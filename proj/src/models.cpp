#include "kbemu/models.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "kbemu/errors.hpp"

namespace kbemu::models {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBoxTol = 1e-12;

}  // namespace

// --- toy model ---------------------------------------------------------------

double toy_f(const Eigen::VectorXd& x) {
  if (x.size() != 2) throw ShapeError("toy_f expects a 2-vector");
  if (!Box::unit(2).contains(x, kBoxTol)) {
    std::ostringstream msg;
    msg << "toy_f: (" << x[0] << ", " << x[1] << ") lies outside [0,1]^2";
    throw DomainError(msg.str());
  }
  return -std::sin(kTwoPi * x[1]) + 0.9 * std::sin(kTwoPi * (1.0 - x[0]) * (1.0 - x[1]));
}

AxisBoundary toy_boundary_k() {
  return AxisBoundary(0, 0.0, [](const Eigen::VectorXd& x) {
    return -1.9 * std::sin(kTwoPi * x[1]);
  }, "toy2d.K");
}

AxisBoundary toy_boundary_l() {
  return AxisBoundary(1, 0.0, [](const Eigen::VectorXd& x) {
    return -0.9 * std::sin(kTwoPi * x[0]);
  }, "toy2d.L");
}

AxisBoundary toy_boundary_k_far() {
  return AxisBoundary(0, 1.0, [](const Eigen::VectorXd& x) {
    return -std::sin(kTwoPi * x[1]);
  }, "toy2d.K1");
}

// --- Arabidopsis -------------------------------------------------------------

const std::array<std::string_view, kNumSpecies> kSpeciesNames = {
    "Auxin", "X", "PLSp", "Ra", "Ra*", "CK", "ET", "PLSm", "Re", "Re*",
    "CTR1", "CTR1*", "PIN1m", "PIN1pi", "PIN1pm", "IAA", "cytokinin", "ACC"};

const std::array<std::string_view, kNumRates> kRateNames = {
    "k1",    "k1a",   "k2",    "k2a",    "k2b",   "k2c",    "k3",     "k3a",   "k3auxin",
    "k4",    "k5",    "k6",    "k6a",    "k7",    "k8",     "k9",     "k10",   "k10a",
    "k11",   "k12",   "k12a",  "k13",    "k14",   "k15",    "k16",    "k16a",  "k17",
    "k18",   "k18a",  "k19",   "k20a",   "k20b",  "k20c",   "k1_v21", "k22a",  "k1_v23",
    "k1_v24", "k25a", "k25b",  "V_IAA",  "Km_IAA", "V_CK",  "Km_CK",  "V_ACC", "Km_ACC"};

const std::array<Rate, kNumVaried> kVariedRates = {k4, k6, k6a, k7, k8, k9};

const std::array<RateRange, kNumVaried> kVariedRanges = {
    RateRange{0, 10}, RateRange{0, 1}, RateRange{0, 20},
    RateRange{0, 10}, RateRange{0, 10}, RateRange{0, 1}};

std::optional<Rate> rate_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumRates; ++i) {
    if (kRateNames[i] == name) return static_cast<Rate>(i);
  }
  return std::nullopt;
}

std::optional<Species> species_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumSpecies; ++i) {
    if (kSpeciesNames[i] == name) return static_cast<Species>(i);
  }
  return std::nullopt;
}

void ArabidopsisSpec::validate() const {
  for (std::size_t i = 0; i < kNumRates; ++i) {
    if (!std::isfinite(rates[i]) || rates[i] < 0.0) {
      throw InvalidParameter("rate " + std::string(kRateNames[i]) +
                             " must be finite and nonnegative");
    }
  }
  for (std::size_t i = 0; i < kNumSpecies; ++i) {
    if (!std::isfinite(initial_state[i]) || initial_state[i] < 0.0) {
      throw InvalidParameter("initial concentration of " + std::string(kSpeciesNames[i]) +
                             " must be finite and nonnegative");
    }
  }
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw InvalidParameter("t_end must be finite and positive");
  }
}

ArabidopsisSpec ArabidopsisSpec::with_varied(const std::array<double, kNumVaried>& raw) const {
  ArabidopsisSpec out = *this;
  for (std::size_t i = 0; i < kNumVaried; ++i) out.rates[kVariedRates[i]] = raw[i];
  return out;
}

namespace {

// c / (1 + s / c0), written as c c0 / (c0 + s). With no inhibitor and a zero
// constant the factor is 1.
double inhibited(double coefficient, double s, double c0) {
  if (coefficient == 0.0) return 0.0;
  if (c0 + s == 0.0) return coefficient;
  return coefficient * c0 / (c0 + s);
}

// c s / (km + s); zero when there is no substrate.
double saturating(double coefficient, double s, double km) {
  if (coefficient == 0.0 || s == 0.0) return 0.0;
  return coefficient * s / (km + s);
}

void check_term(double value, const char* term) {
  if (!std::isfinite(value)) {
    throw ModelEvaluationError(std::string("non-finite value in term ") + term);
  }
}

}  // namespace

State arabidopsis_rhs(const State& raw_state, const Rates& k) {
  State s;
  for (std::size_t i = 0; i < kNumSpecies; ++i) s[i] = std::max(0.0, raw_state[i]);
  State d{};

  const double auxin = s[kAuxin];

  const double auxin_in = inhibited(k[k1a], s[kX], k[k1]) + k[k2] +
                          inhibited(k[k2a] * s[kET], s[kCK], k[k2b]) *
                              (s[kPLSp] == 0.0 ? 0.0 : s[kPLSp] / (k[k2c] + s[kPLSp])) +
                          saturating(k[V_IAA], s[kIAA], k[Km_IAA]);
  check_term(auxin_in, "auxin production");
  const double auxin_out = (k[k3] * auxin) + saturating(k[k3a] * s[kPIN1pm], auxin, k[k3auxin]);
  check_term(auxin_out, "auxin degradation/transport");
  d[kAuxin] = auxin_in - auxin_out;

  d[kX] = k[k16] - k[k16a] * s[kCTR1Star] - k[k17] * s[kX];
  d[kPLSp] = k[k8] * s[kPLSm] - k[k9] * s[kPLSp];

  d[kRa] = -k[k4] * auxin * s[kRa] + k[k5] * s[kRaStar];
  d[kRaStar] = -d[kRa];

  d[kCK] = inhibited(k[k18a], auxin, k[k18]) - k[k19] * s[kCK] +
           saturating(k[V_CK], s[kCytokinin], k[Km_CK]);
  check_term(d[kCK], "cytokinin (CK) balance");

  d[kET] = k[k12] + k[k12a] * auxin * s[kCK] - k[k13] * s[kET] +
           saturating(k[V_ACC], s[kACC], k[Km_ACC]);
  check_term(d[kET], "ethylene (ET) balance");

  d[kPLSm] = inhibited(k[k6] * s[kRaStar], s[kET], k[k6a]) - k[k7] * s[kPLSm];

  d[kRe] = k[k11] * s[kReStar] * s[kET] - (k[k10] + k[k10a] * s[kPLSp]) * s[kRe];
  d[kReStar] = -d[kRe];

  d[kCTR1] = -k[k14] * s[kReStar] * s[kCTR1] + k[k15] * s[kCTR1Star];
  d[kCTR1Star] = -d[kCTR1];

  double pin1_synthesis = 0.0;
  if (k[k20a] != 0.0 && s[kX] != 0.0) {
    pin1_synthesis = k[k20a] / (k[k20b] + s[kCK]) * s[kX] * saturating(1.0, auxin, k[k20c]);
    check_term(pin1_synthesis, "k20a/(k20b+[CK])");
  }
  d[kPIN1m] = pin1_synthesis - k[k1_v21] * s[kPIN1m];

  const double recycling = inhibited(k[k25a] * s[kPIN1pm], auxin, k[k25b]);
  d[kPIN1pi] = k[k22a] * s[kPIN1m] - k[k1_v23] * s[kPIN1pi] - k[k1_v24] * s[kPIN1pi] + recycling;
  d[kPIN1pm] = k[k1_v24] * s[kPIN1pi] - recycling;

  d[kIAA] = 0.0;
  d[kCytokinin] = 0.0;
  d[kACC] = 0.0;

  for (std::size_t i = 0; i < kNumSpecies; ++i) {
    if (!std::isfinite(d[i])) {
      throw ModelEvaluationError("non-finite derivative for " + std::string(kSpeciesNames[i]));
    }
  }
  return d;
}

State integrate(const ArabidopsisSpec& spec, const OdeOptions& options) {
  spec.validate();
  const Rates& rates = spec.rates;
  OdeRhs rhs = [&rates](double, std::span<const double> y, std::span<double> dydt) {
    State s;
    std::copy(y.begin(), y.end(), s.begin());
    const State d = arabidopsis_rhs(s, rates);
    std::copy(d.begin(), d.end(), dydt.begin());
  };
  std::vector<double> y0(spec.initial_state.begin(), spec.initial_state.end());
  const std::vector<double> y1 = integrate_dopri5(rhs, 0.0, spec.t_end, std::move(y0), options);
  State out;
  std::copy(y1.begin(), y1.end(), out.begin());
  return out;
}

double plsp_boundary_k8(const ArabidopsisSpec& spec) {
  if (spec.rate(k8) != 0.0) throw MisuseError("plsp_boundary_k8 requires k8 = 0");
  return spec.initial(kPLSp) * std::exp(-spec.rate(k9) * spec.t_end);
}

double plsp_boundary_k6(const ArabidopsisSpec& spec) {
  if (spec.rate(k6) != 0.0) throw MisuseError("plsp_boundary_k6 requires k6 = 0");
  const double t = spec.t_end;
  const double r7 = spec.rate(k7);
  const double r9 = spec.rate(k9);
  const double plsp0 = spec.initial(kPLSp);
  const double plsm0 = spec.initial(kPLSm);
  const double free = plsp0 * std::exp(-r9 * t);
  const double gap = r9 - r7;
  if (std::abs(gap) < 1e-9 * std::max({r7, r9, 1.0})) {
    return free + spec.rate(k8) * plsm0 * t * std::exp(-r9 * t);
  }
  // (e^{-k7 t} - e^{-k9 t}) / (k9 - k7) without cancellation
  const double kernel = -std::exp(-r7 * t) * std::expm1(-gap * t) / gap;
  return free + spec.rate(k8) * plsm0 * kernel;
}

Eigen::VectorXd input_transform(const std::array<double, kNumVaried>& raw) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(kNumVaried));
  for (std::size_t i = 0; i < kNumVaried; ++i) {
    const auto [lo, hi] = kVariedRanges[i];
    if (!(raw[i] >= lo - kBoxTol && raw[i] <= hi + kBoxTol)) {
      std::ostringstream msg;
      msg << "rate " << kRateNames[kVariedRates[i]] << " = " << raw[i] << " outside [" << lo
          << ", " << hi << "]";
      throw DomainError(msg.str());
    }
    const double v = std::clamp(raw[i], lo, hi);
    out[static_cast<Eigen::Index>(i)] =
        2.0 * (std::sqrt(v) - std::sqrt(lo)) / (std::sqrt(hi) - std::sqrt(lo)) - 1.0;
  }
  return out;
}

std::array<double, kNumVaried> input_transform_inverse(const Eigen::VectorXd& scaled) {
  if (scaled.size() != static_cast<Eigen::Index>(kNumVaried)) {
    throw ShapeError("scaled Arabidopsis input must have 6 entries");
  }
  std::array<double, kNumVaried> raw{};
  for (std::size_t i = 0; i < kNumVaried; ++i) {
    const double s = scaled[static_cast<Eigen::Index>(i)];
    if (!(s >= -1.0 - kBoxTol && s <= 1.0 + kBoxTol)) {
      std::ostringstream msg;
      msg << "scaled input " << i << " = " << s << " outside [-1, 1]";
      throw DomainError(msg.str());
    }
    const auto [lo, hi] = kVariedRanges[i];
    const double root =
        std::sqrt(lo) + 0.5 * (std::clamp(s, -1.0, 1.0) + 1.0) * (std::sqrt(hi) - std::sqrt(lo));
    raw[i] = root * root;
  }
  return raw;
}

ArabidopsisModel::ArabidopsisModel(ArabidopsisSpec base, OdeOptions options)
    : base_(std::move(base)), options_(options) {
  base_.validate();
}

double ArabidopsisModel::operator()(const Eigen::VectorXd& scaled) const {
  return integrate(base_.with_varied(input_transform_inverse(scaled)), options_)[kPLSp];
}

AxisBoundary ArabidopsisModel::boundary_k6() const {
  auto base = std::make_shared<const ArabidopsisSpec>(base_);
  return AxisBoundary(kAxisK6, -1.0, [base](const Eigen::VectorXd& scaled) {
    ArabidopsisSpec spec = base->with_varied(input_transform_inverse(scaled));
    spec.rate(k6) = 0.0;  // sqrt scale: -1 maps to exactly 0 already
    return plsp_boundary_k6(spec);
  }, "arabidopsis.k6");
}

AxisBoundary ArabidopsisModel::boundary_k8() const {
  auto base = std::make_shared<const ArabidopsisSpec>(base_);
  return AxisBoundary(kAxisK8, -1.0, [base](const Eigen::VectorXd& scaled) {
    ArabidopsisSpec spec = base->with_varied(input_transform_inverse(scaled));
    spec.rate(k8) = 0.0;
    return plsp_boundary_k8(spec);
  }, "arabidopsis.k8");
}

// --- registry ----------------------------------------------------------------

EvaluatorRegistry EvaluatorRegistry::builtin(const ArabidopsisModel* arabidopsis) {
  EvaluatorRegistry reg;
  for (const AxisBoundary& b : {toy_boundary_k(), toy_boundary_l(), toy_boundary_k_far()}) {
    reg.add(b.name(), {b.axis(), b.location(), [b](const Eigen::VectorXd& x) {
                         return b.evaluate(x);
                       }});
  }
  if (arabidopsis) {
    for (const AxisBoundary& b : {arabidopsis->boundary_k6(), arabidopsis->boundary_k8()}) {
      reg.add(b.name(), {b.axis(), b.location(), [b](const Eigen::VectorXd& x) {
                           return b.evaluate(x);
                         }});
    }
  }
  return reg;
}

void EvaluatorRegistry::add(std::string name, Entry entry) {
  entries_[std::move(name)] = std::move(entry);
}

std::vector<std::string> EvaluatorRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : entries_) out.push_back(name);
  return out;
}

AxisBoundary EvaluatorRegistry::boundary(const std::string& name, std::size_t axis,
                                         double location) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) {
    std::string known;
    for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown boundary evaluator '" + name + "' (known: " + known + ")");
  }
  if (it->second.axis != axis || it->second.location != location) {
    std::ostringstream msg;
    msg << "evaluator '" << name << "' is defined on x[" << it->second.axis
        << "] = " << it->second.location << ", config says x[" << axis << "] = " << location;
    throw ConfigError(msg.str());
  }
  return AxisBoundary(axis, location, it->second.evaluator, name);
}

AxisBoundary EvaluatorRegistry::boundary(const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) return boundary(name, 0, 0.0);
  return boundary(name, it->second.axis, it->second.location);
}

}  // namespace kbemu::models
