#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace kbemu {

enum class KernelFamily { kGaussian };

/// Product correlation structure with one correlation length per input.
///
/// Every family must satisfy r(0) = 1, r(-d) = r(d) and |r| <= 1, and the
/// product over dimensions must be positive semidefinite. The boundary
/// updates in emulator.hpp rely on nothing else.
struct KernelSpec {
  KernelFamily family = KernelFamily::kGaussian;
  std::vector<double> thetas;

  static KernelSpec gaussian(std::vector<double> thetas);
  static KernelSpec isotropic(double theta, std::size_t dim);

  std::size_t dim() const { return thetas.size(); }
  double theta(std::size_t axis) const { return thetas.at(axis); }

  /// Throws InvalidParameter unless every theta is finite and positive.
  void validate() const;
};

/// r(delta) for one dimension; exp(-delta^2 / theta^2) for the Gaussian.
double corr_1d(double delta, double theta,
               KernelFamily family = KernelFamily::kGaussian);

/// prod_i r_i(x_i - x2_i).
double corr_product(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& x2,
                    const KernelSpec& kernel);

/// Post-boundary correlation factor along the boundary normal:
/// R(a, a2) = r(a - a2) - r(a) r(a2), with a, a2 signed offsets from the
/// boundary.
double updated_corr_component(double a, double a2, double theta,
                              KernelFamily family = KernelFamily::kGaussian);

/// R(a, c) / R(c, c). c is the separation of two parallel boundaries and
/// must be nonzero.
double ratio_corr_component(double a, double c, double theta,
                            KernelFamily family = KernelFamily::kGaussian);

/// Integral of 1 - r(s)^2 over [0, a]. Closed form for the Gaussian family.
double warp_integral(double a, double theta,
                     KernelFamily family = KernelFamily::kGaussian);

/// Same integral by adaptive Gauss-Kronrod quadrature; works for any family.
double warp_integral_quadrature(double a, double theta,
                                KernelFamily family = KernelFamily::kGaussian);

}  // namespace kbemu
