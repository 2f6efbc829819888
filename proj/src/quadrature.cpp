#include "volq/quadrature.hpp"

#include "volq/errors.hpp"
#include "volq/normal.hpp"

#include <algorithm>
#include <cmath>

namespace volq {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw InvalidInput("linspace: need at least 2 points");
    if (!(lo < hi)) throw InvalidInput("linspace: lo must be below hi");
    std::vector<double> out(n);
    double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + h * static_cast<double>(i);
    out.back() = hi;
    return out;
}

namespace {

double eval_cubic(const PiecewisePoly::Segment& s, double z) {
    double u = z - s.center;
    return ((s.coeff[3] * u + s.coeff[2]) * u + s.coeff[1]) * u + s.coeff[0];
}

double eval_cubic_slope(const PiecewisePoly::Segment& s, double z) {
    double u = z - s.center;
    return (3.0 * s.coeff[3] * u + 2.0 * s.coeff[2]) * u + s.coeff[1];
}

// Deterministic pairwise reduction; order depends only on the layout.
double pairwise_sum(std::vector<double>& v) {
    if (v.empty()) return 0.0;
    std::size_t n = v.size();
    while (n > 1) {
        std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i < n / 2; ++i) v[i] = v[2 * i] + v[2 * i + 1];
        if (n % 2 == 1) v[n / 2] = v[n - 1];
        n = half;
    }
    return v[0];
}

} // namespace

PiecewisePoly::PiecewisePoly(std::vector<double> breakpoints, std::vector<Segment> segments)
    : breakpoints_(std::move(breakpoints)), segments_(std::move(segments)) {
    if (breakpoints_.size() < 2)
        throw InvalidInput("piecewise poly: need at least 2 breakpoints");
    if (segments_.size() + 1 != breakpoints_.size())
        throw InvalidInput("piecewise poly: segment count must be breakpoints - 1");
    for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i)
        if (!(breakpoints_[i] < breakpoints_[i + 1]))
            throw InvalidInput("piecewise poly: breakpoints must strictly increase");
    for (double b : breakpoints_)
        if (!std::isfinite(b)) throw InvalidInput("piecewise poly: non-finite breakpoint");

    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
        double z = breakpoints_[i + 1];
        double va = eval_cubic(segments_[i], z);
        double vb = eval_cubic(segments_[i + 1], z);
        double da = eval_cubic_slope(segments_[i], z);
        double db = eval_cubic_slope(segments_[i + 1], z);
        double vscale = std::max({1.0, std::abs(va), std::abs(vb)});
        double dscale = std::max({1.0, std::abs(da), std::abs(db)});
        if (std::abs(va - vb) > 1e-9 * vscale)
            throw InvalidInput("piecewise poly: value jump at an interior breakpoint");
        if (std::abs(da - db) > 1e-7 * dscale)
            throw InvalidInput("piecewise poly: slope jump at an interior breakpoint");
    }
    left_tail_ = eval_cubic(segments_.front(), breakpoints_.front());
    right_tail_ = eval_cubic(segments_.back(), breakpoints_.back());
}

std::size_t PiecewisePoly::locate(double z) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), z);
    if (it == breakpoints_.begin()) return 0;
    std::size_t idx = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return std::min(idx, segments_.size() - 1);
}

double PiecewisePoly::value(double z) const {
    if (z <= breakpoints_.front()) return left_tail_;
    if (z >= breakpoints_.back()) return right_tail_;
    return eval_cubic(segments_[locate(z)], z);
}

double PiecewisePoly::derivative(double z) const {
    if (z < breakpoints_.front() || z > breakpoints_.back()) return 0.0;
    return eval_cubic_slope(segments_[locate(z)], z);
}

double PiecewisePoly::second_derivative(double z) const {
    if (z < breakpoints_.front() || z > breakpoints_.back()) return 0.0;
    const Segment& s = segments_[locate(z)];
    return 2.0 * s.coeff[2] + 6.0 * s.coeff[3] * (z - s.center);
}

PiecewisePoly fit_hermite_cubic(const std::vector<double>& x, const std::vector<double>& y,
                                SlopeMethod method) {
    std::size_t n = x.size();
    if (n < 2) throw InvalidInput("hermite fit: need at least 2 nodes");
    if (y.size() != n) throw InvalidInput("hermite fit: x and y sizes differ");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(x[i] < x[i + 1])) throw InvalidInput("hermite fit: x must strictly increase");

    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        delta[i] = (y[i + 1] - y[i]) / h[i];
    }

    // Slopes of the parabola through each neighbouring triple; the one-sided
    // ends reuse the first and last parabolas.
    std::vector<double> m(n);
    if (n == 2) {
        m[0] = m[1] = delta[0];
    } else {
        for (std::size_t i = 1; i + 1 < n; ++i)
            m[i] = (delta[i - 1] * h[i] + delta[i] * h[i - 1]) / (h[i - 1] + h[i]);
        m[0] = ((2.0 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]);
        m[n - 1] =
            ((2.0 * h[n - 2] + h[n - 3]) * delta[n - 2] - h[n - 2] * delta[n - 3]) /
            (h[n - 2] + h[n - 3]);
    }

    if (method == SlopeMethod::monotone_limited && n >= 2) {
        // Fritsch-Carlson limiter: zero slopes across flat segments, clip the
        // slope-to-secant ratios into the circle of radius 3.
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (delta[i] == 0.0) {
                m[i] = 0.0;
                m[i + 1] = 0.0;
            }
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (delta[i] == 0.0) continue;
            double a = m[i] / delta[i];
            double b = m[i + 1] / delta[i];
            if (a < 0.0) {
                m[i] = 0.0;
                a = 0.0;
            }
            if (b < 0.0) {
                m[i + 1] = 0.0;
                b = 0.0;
            }
            double r2 = a * a + b * b;
            if (r2 > 9.0) {
                double tau = 3.0 / std::sqrt(r2);
                m[i] = tau * a * delta[i];
                m[i + 1] = tau * b * delta[i];
            }
        }
    }

    std::vector<PiecewisePoly::Segment> segs(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double hw = 0.5 * h[i];
        double c = x[i] + hw;
        double ya = y[i], yb = y[i + 1];
        double ma = m[i], mb = m[i + 1];
        PiecewisePoly::Segment s;
        s.center = c;
        s.coeff[0] = 0.5 * (ya + yb) - 0.25 * hw * (mb - ma);
        s.coeff[1] = 1.5 * delta[i] - 0.25 * (ma + mb);
        s.coeff[2] = (mb - ma) / (2.0 * h[i]);
        s.coeff[3] = (ma + mb - 2.0 * delta[i]) / (h[i] * h[i]);
        segs[i] = s;
    }
    return PiecewisePoly(std::vector<double>(x), std::move(segs));
}

GaussianIntegralParts integrate_gaussian_parts(const PiecewisePoly& poly) {
    const auto& bp = poly.breakpoints();
    const auto& segs = poly.segments();
    std::vector<double> contrib(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        std::vector<double> mom = central_segment_moments(3, bp[i], bp[i + 1],
                                                          segs[i].center);
        contrib[i] = segs[i].coeff[0] * mom[0] + segs[i].coeff[1] * mom[1] +
                     segs[i].coeff[2] * mom[2] + segs[i].coeff[3] * mom[3];
    }
    GaussianIntegralParts parts;
    parts.interior = pairwise_sum(contrib);
    parts.tails = poly.left_tail() * norm_cdf(bp.front()) +
                  poly.right_tail() * norm_cdf(-bp.back());
    return parts;
}

double integrate_gaussian(const PiecewisePoly& poly) {
    return integrate_gaussian_parts(poly).total();
}

} // namespace volq
