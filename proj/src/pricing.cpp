#include "volq/pricing.hpp"

#include "volq/errors.hpp"
#include "volq/format.hpp"
#include "volq/normal.hpp"
#include "volq/quadrature.hpp"
#include "volq/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace volq {

PayoffSpec PayoffSpec::log_contract() {
    PayoffSpec p;
    p.name = "log";
    p.psi = [](double k) { return k; };
    p.dpsi = [](double) { return 1.0; };
    p.d2psi = [](double) { return 0.0; };
    return p;
}

PayoffSpec PayoffSpec::power(int n) {
    if (n < 0) throw InvalidInput("power payoff: exponent must be >= 0");
    PayoffSpec p;
    p.name = "k^" + std::to_string(n);
    p.psi = [n](double k) { return std::pow(k, n); };
    p.dpsi = [n](double k) { return n == 0 ? 0.0 : n * std::pow(k, n - 1); };
    p.d2psi = [n](double k) {
        return n < 2 ? 0.0 : static_cast<double>(n) * (n - 1) * std::pow(k, n - 2);
    };
    return p;
}

PayoffSpec PayoffSpec::exponential(double a) {
    if (!std::isfinite(a)) throw InvalidInput("exponential payoff: a must be finite");
    PayoffSpec p;
    p.name = "exp(" + format_sig(a, 6) + "*k)";
    // The Gaussian weight dominates e^{a g(z)} for any a, so the z integrals
    // converge; the caller attests the underlying moment condition.
    p.psi = [a](double k) { return std::exp(a * k); };
    p.dpsi = [a](double k) { return a * std::exp(a * k); };
    p.d2psi = [a](double k) { return a * a * std::exp(a * k); };
    return p;
}

PayoffSpec PayoffSpec::forward() {
    PayoffSpec p;
    p.name = "forward";
    p.psi = [](double k) { return std::expm1(k); };
    p.dpsi = [](double k) { return std::exp(k); };
    p.d2psi = [](double k) { return std::exp(k); };
    return p;
}

PayoffSpec PayoffSpec::spot_log() {
    PayoffSpec p;
    p.name = "k*exp(k)";
    p.psi = [](double k) { return k * std::exp(k); };
    p.dpsi = [](double k) { return (1.0 + k) * std::exp(k); };
    p.d2psi = [](double k) { return (2.0 + k) * std::exp(k); };
    return p;
}

PayoffSpec PayoffSpec::tabulated(const std::vector<double>& k,
                                 const std::vector<double>& psi_values,
                                 const std::vector<double>& psi_slopes) {
    if (!psi_slopes.empty() && psi_slopes.size() != k.size())
        throw InvalidInput("tabulated payoff: slope column size mismatch");
    auto fit = std::make_shared<PiecewisePoly>(
        fit_hermite_cubic(k, psi_values, SlopeMethod::estimated_three_point));
    if (!psi_slopes.empty()) {
        // Rebuild the segments from the supplied slopes instead.
        std::vector<PiecewisePoly::Segment> segs;
        segs.reserve(k.size() - 1);
        for (std::size_t i = 0; i + 1 < k.size(); ++i) {
            double h = k[i + 1] - k[i];
            double delta = (psi_values[i + 1] - psi_values[i]) / h;
            double ma = psi_slopes[i], mb = psi_slopes[i + 1];
            PiecewisePoly::Segment s;
            s.center = k[i] + 0.5 * h;
            s.coeff[0] = 0.5 * (psi_values[i] + psi_values[i + 1]) - 0.125 * h * (mb - ma);
            s.coeff[1] = 1.5 * delta - 0.25 * (ma + mb);
            s.coeff[2] = (mb - ma) / (2.0 * h);
            s.coeff[3] = (ma + mb - 2.0 * delta) / (h * h);
            segs.push_back(s);
        }
        fit = std::make_shared<PiecewisePoly>(std::vector<double>(k), std::move(segs));
    }

    PayoffSpec p;
    p.name = "tabulated";
    p.psi = [fit](double x) { return fit->value(x); };
    p.dpsi = [fit](double x) { return fit->derivative(x); };
    p.d2psi = [fit](double x) { return fit->second_derivative(x); };
    // Probe segment midpoints so the difference stencils stay clear of the
    // breakpoints, where the second derivative jumps.
    const auto& bp = fit->breakpoints();
    std::size_t nseg = bp.size() - 1;
    double min_h = bp[1] - bp[0];
    for (double frac : {0.05, 0.3, 0.5, 0.7, 0.95}) {
        std::size_t i = std::min(static_cast<std::size_t>(frac * nseg), nseg - 1);
        p.fd_probes.push_back(0.5 * (bp[i] + bp[i + 1]));
        min_h = std::min(min_h, bp[i + 1] - bp[i]);
    }
    p.fd_step = min_h / 8.0;
    return p;
}

namespace {

// phi(z) falls below 1e-16 beyond this |z|; the k integrals span its preimage.
constexpr double kWeightCut = 8.476133901101381;

double fd_derivative(const std::function<double(double)>& f, double x, double h) {
    return (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
}

void check_derivative_pair(const std::function<double(double)>& f,
                           const std::function<double(double)>& df,
                           const std::vector<double>& probes,
                           const std::optional<double>& step, const std::string& name,
                           const char* which) {
    for (double p : probes) {
        double h = step ? *step : 1e-3 * std::max(1.0, std::abs(p));
        double claimed = df(p);
        double observed = fd_derivative(f, p, h);
        if (std::abs(claimed - observed) > 1e-6 * std::max(1.0, std::abs(claimed)))
            throw InvalidInput("payoff '" + name + "': " + which +
                               " disagrees with a finite difference at k = " +
                               format_sig(p, 6) + " (claimed " + format_sig(claimed, 9) +
                               ", observed " + format_sig(observed, 9) + ")");
    }
}

void validate_payoff(const PayoffSpec& payoff, bool need_d2) {
    if (!payoff.psi) throw InvalidInput("payoff '" + payoff.name + "': psi is required");
    if (!payoff.polynomial_growth)
        throw InvalidInput("payoff '" + payoff.name +
                           "': pricing needs the polynomial-growth attestation");
    if (!payoff.dpsi)
        throw MissingDerivative("payoff '" + payoff.name + "': dpsi is required");
    if (need_d2 && !payoff.d2psi)
        throw MissingDerivative("payoff '" + payoff.name +
                                "': d2psi is required for the smooth route");
    std::vector<double> probes = payoff.fd_probes;
    if (probes.empty()) probes = {-1.37, -0.61, 0.0, 0.53, 1.29};
    check_derivative_pair(payoff.psi, payoff.dpsi, probes, payoff.fd_step, payoff.name,
                          "dpsi");
    if (need_d2)
        check_derivative_pair(payoff.dpsi, payoff.d2psi, probes, payoff.fd_step,
                              payoff.name, "d2psi");
}

void require_certified(Transform which, const MonotoneCertificate& cert) {
    bool ok = which == Transform::first ? cert.f1_increasing : cert.f2_increasing;
    if (ok) return;
    auto viol = which == Transform::first ? cert.f1_violation : cert.f2_violation;
    double lo = viol ? viol->first : 0.0;
    double hi = viol ? viol->second : 0.0;
    throw NotMonotone(lo, hi,
                      std::string(which == Transform::first ? "f1" : "f2") +
                          " decreases on k in [" + format_sig(lo) + ", " + format_sig(hi) +
                          "]; pricing refused");
}

std::vector<double> z_nodes(const Smile& smile, const ZGridSpec& grid, bool img_f1,
                            bool img_f2) {
    if (!(grid.hi > grid.lo))
        throw InvalidInput("z grid: lo must be below hi");
    if (grid.n < 8) throw InvalidInput("z grid: need at least 8 points");
    std::vector<double> z = linspace(grid.lo, grid.hi, grid.n);
    for (const auto& q : smile.quotes()) {
        FPair f = f_transforms(q.k, q.sigma);
        if (img_f1 && f.f1 > grid.lo && f.f1 < grid.hi) z.push_back(f.f1);
        if (img_f2 && f.f2 > grid.lo && f.f2 < grid.hi) z.push_back(f.f2);
    }
    std::sort(z.begin(), z.end());
    std::vector<double> out;
    out.reserve(z.size());
    for (double v : z)
        if (out.empty() || v - out.back() > 1e-10) out.push_back(v);
    return out;
}

struct ZIntegral {
    double total = 0.0;
    double tails = 0.0;
    std::size_t nodes = 0;
};

template <class F>
ZIntegral integrate_over_z(const std::vector<double>& z, F&& y_of_z) {
    std::vector<double> y(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) y[i] = y_of_z(z[i]);
    PiecewisePoly poly = fit_hermite_cubic(z, y, SlopeMethod::estimated_three_point);
    GaussianIntegralParts parts = integrate_gaussian_parts(poly);
    return {parts.total(), parts.tails, z.size()};
}

PricingResult swap_strike(const Smile& smile, const ZGridSpec& zgrid, Transform which) {
    MonotoneCertificate cert = certify_monotone(smile);
    require_certified(which, cert);
    std::vector<double> z =
        z_nodes(smile, zgrid, which == Transform::first, which == Transform::second);
    ZIntegral zi = integrate_over_z(z, [&](double zv) {
        double k = g_inverse(which, smile, zv, &cert);
        double s = smile.sigma_at(k);
        return s * s;
    });
    PricingResult res;
    res.value = zi.total;
    res.z_integral_part = zi.total;
    res.tail_contribution = zi.tails;
    res.diagnostics.z_nodes = zi.nodes;
    res.diagnostics.f1_certified = which == Transform::first;
    res.diagnostics.f2_certified = which == Transform::second;
    return res;
}

// Composite Simpson with a forced-odd node count.
template <class F>
double simpson(F&& f, double a, double b, std::size_t n) {
    if (n < 3) throw InvalidInput("k grid: need at least 3 Simpson nodes");
    if (n % 2 == 0) ++n;
    double h = (b - a) / static_cast<double>(n - 1);
    double acc = f(a) + f(b);
    for (std::size_t i = 1; i + 1 < n; ++i)
        acc += f(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace

PricingResult variance_swap_strike(const Smile& smile, const ZGridSpec& zgrid) {
    return swap_strike(smile, zgrid, Transform::second);
}

PricingResult gamma_swap_strike(const Smile& smile, const ZGridSpec& zgrid) {
    return swap_strike(smile, zgrid, Transform::first);
}

PricingResult price_smooth(const Smile& smile, const PayoffSpec& payoff, Measure measure,
                           const ZGridSpec& zgrid, const KGridSpec& kgrid) {
    validate_payoff(payoff, true);
    MonotoneCertificate cert = certify_monotone(smile);
    Transform which = measure == Measure::cash ? Transform::second : Transform::first;
    require_certified(which, cert);

    std::vector<double> z =
        z_nodes(smile, zgrid, which == Transform::first, which == Transform::second);
    double sign = measure == Measure::cash ? 1.0 : -1.0;
    ZIntegral zi = integrate_over_z(z, [&](double zv) {
        double k = g_inverse(which, smile, zv, &cert);
        double s = smile.sigma_at(k);
        return payoff.psi(k) - payoff.dpsi(k) * (k + sign * 0.5 * s * s);
    });

    double k_lo = g_inverse(which, smile, -kWeightCut, &cert);
    double k_hi = g_inverse(which, smile, kWeightCut, &cert);
    std::size_t n = kgrid.n;
    double k_part = simpson(
        [&](double k) {
            double s = smile.sigma_at(k);
            FPair f = f_transforms(k, s);
            return payoff.d2psi(k) * s *
                   norm_pdf(which == Transform::first ? f.f1 : f.f2);
        },
        k_lo, k_hi, n);

    PricingResult res;
    res.z_integral_part = zi.total;
    res.k_integral_part = k_part;
    res.value = zi.total + k_part;
    res.tail_contribution = zi.tails;
    res.diagnostics.z_nodes = zi.nodes;
    res.diagnostics.k_nodes = n % 2 == 0 ? n + 1 : n;
    res.diagnostics.f1_certified = which == Transform::first;
    res.diagnostics.f2_certified = which == Transform::second;
    return res;
}

PricingResult price_ac(const Smile& smile, const PayoffSpec& payoff, Measure measure,
                       const ZGridSpec& zgrid) {
    validate_payoff(payoff, false);
    MonotoneCertificate cert = certify_monotone(smile);
    require_certified(Transform::first, cert);
    require_certified(Transform::second, cert);

    std::vector<double> z = z_nodes(smile, zgrid, true, true);

    // Trim nodes whose exponential factor cannot be represented; the true
    // integrand vanishes there (phi decays faster), and the constant tail of
    // the trimmed fit lands in tail_contribution.
    auto safe = [&](double zv) {
        double k1 = g_inverse(Transform::first, smile, zv, &cert);
        double k2 = g_inverse(Transform::second, smile, zv, &cert);
        double e = measure == Measure::cash ? -k1 : k2;
        return e < 700.0;
    };
    std::size_t lo = 0, hi = z.size();
    while (lo < hi && !safe(z[lo])) ++lo;
    while (hi > lo && !safe(z[hi - 1])) --hi;
    std::vector<double> zt(z.begin() + static_cast<std::ptrdiff_t>(lo),
                           z.begin() + static_cast<std::ptrdiff_t>(hi));
    if (zt.size() < 8)
        throw InvalidInput("price_ac: representable z range is too small for this payoff");

    ZIntegral zi = integrate_over_z(zt, [&](double zv) {
        double k1 = g_inverse(Transform::first, smile, zv, &cert);
        double k2 = g_inverse(Transform::second, smile, zv, &cert);
        if (measure == Measure::cash)
            return payoff.psi(k2) - payoff.dpsi(k2) + payoff.dpsi(k1) * std::exp(-k1);
        return payoff.psi(k1) + payoff.dpsi(k1) - payoff.dpsi(k2) * std::exp(k2);
    });

    PricingResult res;
    res.value = zi.total;
    res.z_integral_part = zi.total;
    res.tail_contribution = zi.tails;
    res.diagnostics.z_nodes = zi.nodes;
    res.diagnostics.f1_certified = true;
    res.diagnostics.f2_certified = true;
    return res;
}

} // namespace volq
