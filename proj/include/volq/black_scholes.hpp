#pragma once

#include <string>

namespace volq {

// Forward level for one expiry. All prices in this library are undiscounted
// (forward measure); the label is carried through to reports only.
struct ForwardContext {
    double forward = 1.0;
    std::string expiry_label;
};

// One smile quote: log-moneyness k = log(strike / forward) and *total*
// implied volatility, i.e. annualized vol times sqrt of the year fraction.
struct VolQuote {
    double k = 0.0;
    double sigma = 0.0;
};

struct DValues {
    double d1 = 0.0;
    double d2 = 0.0;
};

// d2 = (-k - sigma^2/2) / sigma, d1 = d2 + sigma. sigma is total vol.
DValues d_values(double k, double sigma);

// Undiscounted Black-Scholes put, P = F (e^k Phi(-d2) - Phi(-d1)).
// For k >= 0 the value is assembled as intrinsic plus the call to avoid
// cancellation deep in the money.
double bs_put(const ForwardContext& ctx, double k, double sigma);

// Undiscounted Black-Scholes call, mirrored assembly: direct for k >= 0,
// intrinsic plus the put for k < 0.
double bs_call(const ForwardContext& ctx, double k, double sigma);

// Inverts bs_put in sigma at fixed k. Bracketed bisection locates the root,
// then Newton steps with the analytic vega polish it without leaving the
// bracket. Throws NoVolSolution outside (intrinsic, F e^k).
double implied_vol(const ForwardContext& ctx, double k, double put_price);

// Same solver fed with the out-of-the-money option value: a put for k <= 0,
// a call for k > 0. Deep in the money the intrinsic part swamps the optional
// value in double precision, so recovering sigma from a put quote alone is
// hopeless there; the OTM value carries the full information on both wings.
double implied_vol_otm(const ForwardContext& ctx, double k, double otm_value);

} // namespace volq
