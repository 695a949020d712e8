#include "kbemu/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kbemu/errors.hpp"

namespace kbemu {

namespace {

void check_theta(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw InvalidParameter("correlation length must be finite and positive, got " +
                           std::to_string(theta));
  }
}

}  // namespace

KernelSpec KernelSpec::gaussian(std::vector<double> thetas) {
  KernelSpec spec{KernelFamily::kGaussian, std::move(thetas)};
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::isotropic(double theta, std::size_t dim) {
  return gaussian(std::vector<double>(dim, theta));
}

void KernelSpec::validate() const {
  if (thetas.empty()) throw InvalidParameter("kernel needs at least one correlation length");
  for (double t : thetas) check_theta(t);
}

double corr_1d(double delta, double theta, KernelFamily family) {
  check_theta(theta);
  switch (family) {
    case KernelFamily::kGaussian: {
      const double z = delta / theta;
      return std::exp(-z * z);
    }
  }
  throw InvalidParameter("unknown kernel family");
}

double corr_product(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& x2,
                    const KernelSpec& kernel) {
  const auto d = static_cast<Eigen::Index>(kernel.dim());
  if (x.size() != d || x2.size() != d) {
    throw ShapeError("corr_product: points have dimension " + std::to_string(x.size()) +
                     " and " + std::to_string(x2.size()) + ", kernel has " +
                     std::to_string(d));
  }
  switch (kernel.family) {
    case KernelFamily::kGaussian: {
      // exp of the summed exponents is the product of the factors
      double s = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        const double z = (x[i] - x2[i]) / kernel.thetas[static_cast<std::size_t>(i)];
        s += z * z;
      }
      return std::exp(-s);
    }
  }
  throw InvalidParameter("unknown kernel family");
}

double updated_corr_component(double a, double a2, double theta, KernelFamily family) {
  return corr_1d(a - a2, theta, family) - corr_1d(a, theta, family) * corr_1d(a2, theta, family);
}

double ratio_corr_component(double a, double c, double theta, KernelFamily family) {
  if (c == 0.0) {
    throw DegenerateConfiguration("ratio_corr_component: parallel boundaries coincide (c = 0)");
  }
  const double denom = updated_corr_component(c, c, theta, family);
  if (!(denom > 0.0)) {
    throw DegenerateConfiguration("ratio_corr_component: R(c, c) underflows for c = " +
                                  std::to_string(c));
  }
  return updated_corr_component(a, c, theta, family) / denom;
}

double warp_integral(double a, double theta, KernelFamily family) {
  if (!(a >= 0.0)) throw DomainError("warp_integral: a must be nonnegative");
  check_theta(theta);
  switch (family) {
    case KernelFamily::kGaussian:
      return a - theta * std::sqrt(std::numbers::pi / 8.0) *
                     std::erf(std::numbers::sqrt2 * a / theta);
  }
  return warp_integral_quadrature(a, theta, family);
}

double warp_integral_quadrature(double a, double theta, KernelFamily family) {
  if (!(a >= 0.0)) throw DomainError("warp_integral: a must be nonnegative");
  check_theta(theta);
  if (a == 0.0) return 0.0;
  auto integrand = [&](double s) {
    const double r = corr_1d(s, theta, family);
    return 1.0 - r * r;
  };
  // Split at multiples of theta so each panel sees a smooth, resolved piece.
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0;
  double lo = 0.0;
  while (lo < a) {
    if (integrand(lo) == 1.0) {
      // saturated: the remaining integrand is 1 to machine precision
      total += a - lo;
      break;
    }
    const double hi = std::min(a, lo + theta);
    double err = 0.0;
    total += Quad::integrate(integrand, lo, hi, 15, 1e-14, &err);
    lo = hi;
  }
  return total;
}

}  // namespace kbemu
