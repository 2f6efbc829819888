#include "volq/black_scholes.hpp"

#include "volq/errors.hpp"
#include "volq/normal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace volq {

DValues d_values(double k, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw InvalidInput("d_values: sigma must be positive and finite");
    if (!std::isfinite(k)) throw InvalidInput("d_values: k must be finite");
    double d2 = (-k - 0.5 * sigma * sigma) / sigma;
    return {d2 + sigma, d2};
}

double bs_put(const ForwardContext& ctx, double k, double sigma) {
    if (!(ctx.forward > 0.0) || !std::isfinite(ctx.forward))
        throw InvalidInput("bs_put: forward must be positive and finite");
    auto [d1, d2] = d_values(k, sigma);
    double F = ctx.forward;
    if (k >= 0.0) {
        double call = F * (norm_cdf(d1) - std::exp(k) * norm_cdf(d2));
        return F * std::expm1(k) + std::max(call, 0.0);
    }
    return F * (std::exp(k) * norm_cdf(-d2) - norm_cdf(-d1));
}

double bs_call(const ForwardContext& ctx, double k, double sigma) {
    if (!(ctx.forward > 0.0) || !std::isfinite(ctx.forward))
        throw InvalidInput("bs_call: forward must be positive and finite");
    auto [d1, d2] = d_values(k, sigma);
    double F = ctx.forward;
    if (k >= 0.0) return F * (norm_cdf(d1) - std::exp(k) * norm_cdf(d2));
    double put = F * (std::exp(k) * norm_cdf(-d2) - norm_cdf(-d1));
    return -F * std::expm1(k) + std::max(put, 0.0);
}

namespace {

// Both bs_put and bs_call are strictly increasing in sigma with vega
// F phi(d1); bracketed bisection plus clipped Newton solves either.
template <typename Price>
double solve_vol(const ForwardContext& ctx, double k, double target, Price price) {
    double lo = 1e-8;
    while (lo > 5e-300 && price(lo) > target) lo *= 0.25;
    double hi = 2.0;
    while (hi < 1e8 && price(hi) < target) hi *= 2.0;

    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, lo); ++it) {
        double mid = 0.5 * (lo + hi);
        if (price(mid) < target)
            lo = mid;
        else
            hi = mid;
    }

    double sigma = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        double diff = price(sigma) - target;
        if (diff > 0.0)
            hi = std::min(hi, sigma);
        else
            lo = std::max(lo, sigma);
        double vega = ctx.forward * norm_pdf(d_values(k, sigma).d1);
        if (!(vega > 0.0)) break;
        double step = diff / vega;
        double next = sigma - step;
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - sigma) <= 1e-16 * std::max(1.0, sigma)) {
            sigma = next;
            break;
        }
        sigma = next;
    }
    return sigma;
}

} // namespace

double implied_vol(const ForwardContext& ctx, double k, double put_price) {
    if (!(ctx.forward > 0.0) || !std::isfinite(ctx.forward))
        throw InvalidInput("implied_vol: forward must be positive and finite");
    if (!std::isfinite(k)) throw InvalidInput("implied_vol: k must be finite");
    if (!std::isfinite(put_price)) throw InvalidInput("implied_vol: price must be finite");

    double F = ctx.forward;
    double intrinsic = k > 0.0 ? F * std::expm1(k) : 0.0;
    double upper = F * std::exp(k);
    if (!(put_price > intrinsic)) {
        std::ostringstream msg;
        msg << "implied_vol: price " << put_price << " at or below intrinsic " << intrinsic;
        throw NoVolSolution(NoVolSolution::Reason::below_intrinsic, msg.str());
    }
    if (!(put_price < upper)) {
        std::ostringstream msg;
        msg << "implied_vol: price " << put_price << " at or above strike bound " << upper;
        throw NoVolSolution(NoVolSolution::Reason::above_upper_bound, msg.str());
    }
    return solve_vol(ctx, k, put_price,
                     [&](double sigma) { return bs_put(ctx, k, sigma); });
}

double implied_vol_otm(const ForwardContext& ctx, double k, double otm_value) {
    if (!(ctx.forward > 0.0) || !std::isfinite(ctx.forward))
        throw InvalidInput("implied_vol_otm: forward must be positive and finite");
    if (!std::isfinite(k)) throw InvalidInput("implied_vol_otm: k must be finite");
    if (!std::isfinite(otm_value))
        throw InvalidInput("implied_vol_otm: value must be finite");

    double cap = ctx.forward * std::min(1.0, std::exp(k));
    if (!(otm_value > 0.0)) {
        std::ostringstream msg;
        msg << "implied_vol_otm: value " << otm_value << " at or below intrinsic 0";
        throw NoVolSolution(NoVolSolution::Reason::below_intrinsic, msg.str());
    }
    if (!(otm_value < cap)) {
        std::ostringstream msg;
        msg << "implied_vol_otm: value " << otm_value << " at or above bound " << cap;
        throw NoVolSolution(NoVolSolution::Reason::above_upper_bound, msg.str());
    }
    if (k > 0.0)
        return solve_vol(ctx, k, otm_value,
                         [&](double sigma) { return bs_call(ctx, k, sigma); });
    return solve_vol(ctx, k, otm_value,
                     [&](double sigma) { return bs_put(ctx, k, sigma); });
}

} // namespace volq
