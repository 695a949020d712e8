#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kbemu/boundary.hpp"
#include "kbemu/box.hpp"
#include "kbemu/ode.hpp"

namespace kbemu::models {

// ---------------------------------------------------------------------------
// Two-dimensional trigonometric toy simulator on [0,1]^2.

/// f(x) = -sin(2 pi x2) + 0.9 sin(2 pi (1 - x1)(1 - x2)).
double toy_f(const Eigen::VectorXd& x);

/// x1 = 0, where f = -1.9 sin(2 pi x2).
AxisBoundary toy_boundary_k();
/// x2 = 0, where f = -0.9 sin(2 pi x1).
AxisBoundary toy_boundary_l();
/// x1 = 1, where f = -sin(2 pi x2). Parallel partner of toy_boundary_k().
AxisBoundary toy_boundary_k_far();

// ---------------------------------------------------------------------------
// Hormonal crosstalk network in the Arabidopsis root: 18 species, 45 rates.

inline constexpr std::size_t kNumSpecies = 18;
inline constexpr std::size_t kNumRates = 45;
inline constexpr std::size_t kNumVaried = 6;

enum Species : std::size_t {
  kAuxin, kX, kPLSp, kRa, kRaStar, kCK, kET, kPLSm, kRe, kReStar,
  kCTR1, kCTR1Star, kPIN1m, kPIN1pi, kPIN1pm, kIAA, kCytokinin, kACC
};

enum Rate : std::size_t {
  k1, k1a, k2, k2a, k2b, k2c, k3, k3a, k3auxin, k4, k5, k6, k6a, k7, k8, k9,
  k10, k10a, k11, k12, k12a, k13, k14, k15, k16, k16a, k17, k18, k18a, k19,
  k20a, k20b, k20c, k1_v21, k22a, k1_v23, k1_v24, k25a, k25b,
  V_IAA, Km_IAA, V_CK, Km_CK, V_ACC, Km_ACC
};

extern const std::array<std::string_view, kNumSpecies> kSpeciesNames;
extern const std::array<std::string_view, kNumRates> kRateNames;

/// The six emulated inputs, in emulator axis order.
extern const std::array<Rate, kNumVaried> kVariedRates;

struct RateRange {
  double lo;
  double hi;
};
extern const std::array<RateRange, kNumVaried> kVariedRanges;

/// Emulator axes of the two known boundaries.
inline constexpr std::size_t kAxisK6 = 1;
inline constexpr std::size_t kAxisK8 = 4;

using State = std::array<double, kNumSpecies>;
using Rates = std::array<double, kNumRates>;

std::optional<Rate> rate_from_name(std::string_view name);
std::optional<Species> species_from_name(std::string_view name);

struct ArabidopsisSpec {
  Rates rates{};
  State initial_state{};
  double t_end = 2.0;

  double rate(Rate r) const { return rates[r]; }
  double& rate(Rate r) { return rates[r]; }
  double initial(Species s) const { return initial_state[s]; }
  double& initial(Species s) { return initial_state[s]; }

  /// Finite, nonnegative rates and concentrations; positive t_end.
  void validate() const;

  /// Copy with the six varied rates replaced (raw, unscaled values).
  ArabidopsisSpec with_varied(const std::array<double, kNumVaried>& raw) const;
};

/// Right-hand sides of the 18 rate equations. Negative concentrations are
/// clamped to zero before evaluation.
State arabidopsis_rhs(const State& state, const Rates& rates);

/// State at spec.t_end by adaptive Dormand-Prince integration.
State integrate(const ArabidopsisSpec& spec, const OdeOptions& options = {});

/// [PLSp](t_end) when k8 = 0: PLSp0 exp(-k9 t).
double plsp_boundary_k8(const ArabidopsisSpec& spec);

/// [PLSp](t_end) when k6 = 0, where PLSm decays freely and feeds PLSp.
double plsp_boundary_k6(const ArabidopsisSpec& spec);

/// Raw varied rates -> [-1,1] on the square-root scale, and back.
Eigen::VectorXd input_transform(const std::array<double, kNumVaried>& raw);
std::array<double, kNumVaried> input_transform_inverse(const Eigen::VectorXd& scaled);

/// [PLSp] at t_end as a function of the six scaled inputs, with the known
/// boundaries k6 = 0 and k8 = 0 at scaled coordinate -1.
class ArabidopsisModel {
 public:
  explicit ArabidopsisModel(ArabidopsisSpec base, OdeOptions options = {});

  const ArabidopsisSpec& base() const { return base_; }
  static Box input_box() { return Box::symmetric(kNumVaried); }

  double operator()(const Eigen::VectorXd& scaled) const;

  AxisBoundary boundary_k6() const;
  AxisBoundary boundary_k8() const;

 private:
  ArabidopsisSpec base_;
  OdeOptions options_;
};

// ---------------------------------------------------------------------------

/// Named boundary evaluators that configuration files refer to.
class EvaluatorRegistry {
 public:
  struct Entry {
    std::size_t axis;
    double location;
    BoundaryFunction evaluator;
  };

  /// Toy boundaries always; Arabidopsis boundaries when a model is given.
  static EvaluatorRegistry builtin(const ArabidopsisModel* arabidopsis = nullptr);

  void add(std::string name, Entry entry);
  bool contains(const std::string& name) const { return entries_.count(name) > 0; }
  std::vector<std::string> names() const;

  /// Boundary for a registered evaluator. axis and location must match the
  /// registration; they are accepted so configs stay self-describing.
  AxisBoundary boundary(const std::string& name, std::size_t axis, double location) const;
  AxisBoundary boundary(const std::string& name) const;

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace kbemu::models
