#pragma once

namespace hdlda {

double std_normal_pdf(double x);

/// Φ(x). Uses the complementary error function on whichever side keeps the
/// result free of cancellation, so Φ(8) = 1 - 6.22e-16 is resolved.
double std_normal_cdf(double x);

/// 1 - Φ(x) without cancellation.
double std_normal_sf(double x);

/// P(U <= h, V <= k) for a standard bivariate normal with correlation rho.
///
/// Gauss-Legendre quadrature (20 nodes) of the Drezner-Wesolowsky
/// correlation integral, switching to the Genz high-correlation expansion for
/// |rho| >= 0.925. Absolute error is below 1e-8 over the whole domain.
/// Throws Error{CorrelationOutOfRange} unless |rho| < 1 - 1e-12.
double bvn_lower_cdf(double h, double k, double rho);

}  // namespace hdlda
