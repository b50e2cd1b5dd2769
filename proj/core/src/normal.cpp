#include "hdlda/normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hdlda/error.hpp"

namespace hdlda {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Half of the symmetric 20-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 10> kGlNodes = {
    0.9931285991850949, 0.9639719272779138, 0.9122344282513259, 0.8391169718222188,
    0.7463319064601508, 0.6360536807265150, 0.5108670019508271, 0.3737060887154196,
    0.2277858511416451, 0.07652652113349733};
constexpr std::array<double, 10> kGlWeights = {
    0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
    0.1019301198172404,  0.1181945319615184,  0.1316886384491766,  0.1420961093183821,
    0.1491729864726037,  0.1527533871307259};

// P(U > h, V > k).
double bvn_upper(double h, double k, double r) {
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double sn = std::sin(asr * (1.0 + sign * kGlNodes[i]) / 2.0);
        bvn += kGlWeights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    return bvn * asr / (2.0 * kTwoPi) + std_normal_cdf(-h) * std_normal_cdf(-k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0) {
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    }
    if (hk > -100.0) {
      const double b = std::sqrt(bs);
      const double sp = std::sqrt(kTwoPi) * std_normal_cdf(-b / a);
      bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double xs = std::pow(a * (sign * kGlNodes[i] + 1.0), 2);
        const double rs = std::sqrt(1.0 - xs);
        asr = -(bs / xs + hk) / 2.0;
        if (asr > -100.0) {
          const double sp = 1.0 + c * xs * (1.0 + d * xs);
          const double ep = std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs;
          bvn += a * kGlWeights[i] * std::exp(asr) * (ep - sp);
        }
      }
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) return bvn + std_normal_cdf(-std::max(h, k));
  if (h >= k) return -bvn;
  const double l = h < 0.0 ? std_normal_cdf(k) - std_normal_cdf(h)
                           : std_normal_cdf(-h) - std_normal_cdf(-k);
  return l - bvn;
}

}  // namespace

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi);
}

double std_normal_cdf(double x) {
  if (x < 0.0) return 0.5 * std::erfc(-x * kInvSqrt2);
  return 1.0 - 0.5 * std::erfc(x * kInvSqrt2);
}

double std_normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double bvn_lower_cdf(double h, double k, double rho) {
  if (!(std::abs(rho) < 1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "bvn_lower_cdf: correlation " << rho << " outside (-1, 1)";
    throw Error(ErrorCode::CorrelationOutOfRange, msg.str());
  }
  if (std::isinf(h) || std::isinf(k)) {
    if (h == -INFINITY || k == -INFINITY) return 0.0;
    if (h == INFINITY) return std_normal_cdf(k);
    return std_normal_cdf(h);
  }
  const double p = bvn_upper(-h, -k, rho);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace hdlda
