#include "kinetics/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kinetics {

double radical_inverse(std::uint64_t i, std::uint32_t base) {
    const double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (i != 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0,1)");

    // Coefficients of Acklam's minimax rational approximations.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;

    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley refinement against erfc brings the error near machine level.
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

HaltonStream::HaltonStream(std::uint64_t seed, std::uint64_t stream) {
    // Keep offsets below 2^40 so index arithmetic never overflows and the
    // radical inverse stays cheap; streams are still ~2^20 apart at least.
    offset_ = splitmix64(seed ^ splitmix64(stream)) & ((1ULL << 40) - 1);
}

double HaltonStream::dim(std::uint64_t index, int d) const {
    static constexpr std::uint32_t bases[5] = {2, 3, 5, 7, 11};
    // Element 0 of the raw sequence is the lattice origin; skip it.
    return radical_inverse(offset_ + index + 1, bases[d]);
}

Vec3 HaltonStream::gaussian3(std::uint64_t index) const {
    return {normal_quantile(dim(index, 0)), normal_quantile(dim(index, 1)),
            normal_quantile(dim(index, 2))};
}

Vec3 HaltonStream::sphere(std::uint64_t index) const {
    const double z = 1.0 - 2.0 * dim(index, 3);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * std::numbers::pi * dim(index, 4);
    return {s * std::cos(phi), s * std::sin(phi), z};
}

}  // namespace kinetics
