#pragma once

#include <vector>

namespace volq {

// Standard normal density. Zero at infinite arguments.
double norm_pdf(double x);

// Standard normal CDF via erfc; keeps full relative accuracy in the left tail.
double norm_cdf(double x);

inline constexpr int kMaxMomentDegree = 16;

// Gaussian-weighted power moments of one z-segment:
// moments[j] = integral over [lower, upper] of z^j phi(z) dz, j = 0..degree.
// Endpoints may be infinite; the boundary terms vanish there exactly.
struct SegmentMoments {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<double> moments;
};

SegmentMoments segment_moments(int degree, double lower, double upper);

// Moments about a local center: m[j] = integral of (z - center)^j phi(z) dz.
// Expanding about the segment midpoint keeps the recursion well conditioned
// for segments far from the origin.
std::vector<double> central_segment_moments(int degree, double lower, double upper,
                                            double center);

} // namespace volq
