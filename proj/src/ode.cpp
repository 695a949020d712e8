#include "kbemu/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kbemu/errors.hpp"

namespace kbemu {

namespace {

// Dormand & Prince (1980) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b* (fifth minus fourth order weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

std::string dump_state(double t, double h, const std::vector<double>& y) {
  std::ostringstream out;
  out.precision(17);
  out << "t = " << t << ", h = " << h << ", y = [";
  for (std::size_t i = 0; i < y.size(); ++i) out << (i ? ", " : "") << y[i];
  out << "]";
  return out.str();
}

}  // namespace

std::vector<double> integrate_dopri5(const OdeRhs& rhs, double t0, double t1,
                                     std::vector<double> y, const OdeOptions& options,
                                     OdeStats* stats) {
  if (!(options.rtol > 0.0) || !(options.atol > 0.0)) {
    throw InvalidParameter("ODE tolerances must be positive");
  }
  if (!(t1 >= t0)) throw InvalidParameter("integration end time precedes start time");
  const std::size_t n = y.size();
  OdeStats local;
  OdeStats& st = stats ? *stats : local;
  if (t1 == t0 || n == 0) return y;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  auto eval = [&](double t, const std::vector<double>& state, std::vector<double>& out) {
    rhs(t, state, out);
    ++st.evaluations;
  };

  auto error_scale = [&](double y0, double y1) {
    return options.atol + options.rtol * std::max(std::abs(y0), std::abs(y1));
  };

  double t = t0;
  eval(t, y, k1);

  const double span = t1 - t0;
  double h = options.initial_step;
  if (!(h > 0.0)) {
    // Hairer-Norsett-Wanner starting step from the initial slope.
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = error_scale(y[i], y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, span);
  }

  const double min_step = 1e-14 * std::max(1.0, std::abs(t1));
  while (t < t1) {
    if (st.accepted + st.rejected >= options.max_steps) {
      throw StiffnessError("step budget exhausted; the system may be stiff. Tighten "
                           "tolerances or reduce the rates. " + dump_state(t, h, y));
    }
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }
    if (h < min_step && !last) {
      throw StiffnessError("step size underflow; the system may be stiff. Tighten "
                           "tolerances or reduce the rates. " + dump_state(t, h, y));
    }

    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    eval(t + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    eval(t + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    eval(t + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    eval(t + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    eval(t + h, tmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    eval(t + h, ynew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
      const double sc = error_scale(y[i], ynew[i]);
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / n);
    if (!std::isfinite(err)) {
      throw StiffnessError("non-finite local error estimate. " + dump_state(t, h, y));
    }

    if (err <= 1.0) {
      t = last ? t1 : t + h;
      y.swap(ynew);
      k1.swap(k7);
      ++st.accepted;
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= factor;
    } else {
      ++st.rejected;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
    }
  }
  return y;
}

}  // namespace kbemu
