#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace kbemu {

/// dy/dt = rhs(t, y), written into dydt.
using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 picks one from the initial slope
  std::size_t max_steps = 1'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

/// Dormand-Prince 5(4) with FSAL and standard step-size control. Returns
/// y(t1). Throws StiffnessError when the step size underflows or the step
/// budget runs out.
std::vector<double> integrate_dopri5(const OdeRhs& rhs, double t0, double t1,
                                     std::vector<double> y0, const OdeOptions& options = {},
                                     OdeStats* stats = nullptr);

}  // namespace kbemu
