#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace volq {

// n evenly spaced points from lo to hi inclusive; n >= 2.
std::vector<double> linspace(double lo, double hi, std::size_t n);

// Piecewise cubic on a breakpoint grid, constant beyond the ends, with each
// segment stored in coordinates local to its midpoint:
//   value(z) = sum_i coeff[i] * (z - center)^i  on [breakpoints[j], breakpoints[j+1]].
// Construction validates C^1 continuity across interior breakpoints.
class PiecewisePoly {
public:
    struct Segment {
        double center = 0.0;
        std::array<double, 4> coeff{};
    };

    PiecewisePoly(std::vector<double> breakpoints, std::vector<Segment> segments);

    double value(double z) const;
    double derivative(double z) const;
    double second_derivative(double z) const; // piecewise linear, jumps at breakpoints

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<Segment>& segments() const { return segments_; }
    double left_tail() const { return left_tail_; }
    double right_tail() const { return right_tail_; }

private:
    std::size_t locate(double z) const;

    std::vector<double> breakpoints_;
    std::vector<Segment> segments_;
    double left_tail_ = 0.0;
    double right_tail_ = 0.0;
};

enum class SlopeMethod {
    estimated_three_point, // parabolic slopes through neighbouring triples
    monotone_limited       // three-point slopes run through the Fritsch-Carlson limiter
};

// C^1 cubic Hermite interpolant of (x, y); x strictly increasing, size >= 2.
PiecewisePoly fit_hermite_cubic(const std::vector<double>& x, const std::vector<double>& y,
                                SlopeMethod method = SlopeMethod::estimated_three_point);

struct GaussianIntegralParts {
    double interior = 0.0; // segments, each integrated exactly against phi
    double tails = 0.0;    // constant extensions times their Gaussian mass
    double total() const { return interior + tails; }
};

// integral over the whole line of poly(z) phi(z) dz. Exact per segment via
// the closed-form Gaussian segment moments; deterministic summation order.
GaussianIntegralParts integrate_gaussian_parts(const PiecewisePoly& poly);
double integrate_gaussian(const PiecewisePoly& poly);

} // namespace volq
