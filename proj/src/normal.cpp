#include "volq/normal.hpp"

#include "volq/errors.hpp"

#include <cmath>
#include <string>

namespace volq {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267793994606;
constexpr double kInvSqrt2 = 0.70710678118654752440084436;

// (x - c)^p * phi(x), read as exactly zero at infinite x.
double boundary_term(double x, double c, int p) {
    if (std::isinf(x)) return 0.0;
    double w = norm_pdf(x);
    if (w == 0.0) return 0.0;
    double base = x - c;
    double pw = 1.0;
    for (int i = 0; i < p; ++i) pw *= base;
    return pw * w;
}

} // namespace

double norm_pdf(double x) {
    if (std::isinf(x)) return 0.0;
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) {
    if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

std::vector<double> central_segment_moments(int degree, double lower, double upper,
                                            double center) {
    if (degree < 0 || degree > kMaxMomentDegree)
        throw InvalidInput("segment moments: degree must be in [0, " +
                           std::to_string(kMaxMomentDegree) + "]");
    if (std::isnan(lower) || std::isnan(upper) || std::isnan(center))
        throw InvalidInput("segment moments: endpoints and center must not be NaN");
    if (lower > upper)
        throw InvalidInput("segment moments: lower endpoint exceeds upper");

    std::vector<double> m(static_cast<std::size_t>(degree) + 1, 0.0);
    if (lower == upper) return m;

    // Difference complements on the right half-line: the plain CDF saturates
    // toward 1 there and the recursion would amplify the lost digits.
    m[0] = lower >= 0.0 ? norm_cdf(-lower) - norm_cdf(-upper)
                        : norm_cdf(upper) - norm_cdf(lower);
    double prev2 = 0.0;            // m[j-2], with m[-1] := 0
    double prev1 = m[0];
    for (int j = 1; j <= degree; ++j) {
        // Integration by parts of (z-c)^j phi(z) using phi'(z) = -z phi(z).
        double mj = boundary_term(lower, center, j - 1) - boundary_term(upper, center, j - 1)
                    + (j - 1) * prev2 - center * prev1;
        m[static_cast<std::size_t>(j)] = mj;
        prev2 = prev1;
        prev1 = mj;
    }
    return m;
}

SegmentMoments segment_moments(int degree, double lower, double upper) {
    SegmentMoments out;
    out.lower = lower;
    out.upper = upper;
    out.moments = central_segment_moments(degree, lower, upper, 0.0);
    return out;
}

} // namespace volq
