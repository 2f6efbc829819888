#pragma once

#include "volq/black_scholes.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace volq {

enum class TailKind { flat, lee_wing };

// Extrapolation beyond the quoted range. flat holds the endpoint vol.
// lee_wing grows total *variance* linearly at rate q per unit of distance
// from the endpoint, capped by the wing bound sqrt(q |k|):
//   sigma(k)^2 = min(sigma_end^2 + q (k_end - k), q |k|)   (left side)
// A side using lee_wing needs its q in (0, 2), an endpoint on that side's
// sign (k_min <= 0, resp. k_max >= 0) and sigma_end^2 <= q |k_end| so the
// tail joins the spline continuously.
struct TailPolicy {
    TailKind kind = TailKind::flat;
    std::optional<double> q_left;
    std::optional<double> q_right;
};

inline constexpr double kSigmaFloor = 1e-8;

// One expiry's total-vol smile: a natural C^2 cubic spline through the
// quotes, extended by the tail policy. Immutable once constructed.
class Smile {
public:
    // Quotes are sorted by k; at least 3 are required, all with positive
    // finite sigma. Coincident k values raise DuplicateStrike.
    Smile(ForwardContext ctx, std::vector<VolQuote> quotes, TailPolicy tails = {});

    // Total vol at k, clamped below at kSigmaFloor.
    double sigma_at(double k) const;

    // d sigma / dk. Spline derivative in range, tail derivative outside;
    // at the endpoints the spline side wins.
    double sigma_slope_at(double k) const;

    // Unclamped interpolant (tail value outside the range). Diagnostics only.
    double raw_sigma_at(double k) const;

    const ForwardContext& ctx() const { return ctx_; }
    const std::vector<VolQuote>& quotes() const { return quotes_; }
    const TailPolicy& tails() const { return tails_; }
    double k_min() const { return quotes_.front().k; }
    double k_max() const { return quotes_.back().k; }

private:
    double spline_at(double k) const;
    double spline_slope_at(double k) const;
    double tail_sigma(double k, bool left) const;

    ForwardContext ctx_;
    std::vector<VolQuote> quotes_;
    TailPolicy tails_;
    std::vector<double> m2_; // spline second derivatives, natural ends
};

enum class QuoteConvention { annualized_vol, total_vol, put_price };
enum class AxisKind { strike, log_moneyness };

// One raw input row before conversion. line is the 1-based source line for
// error reporting (0 when synthesized).
struct RawQuote {
    double axis = 0.0;  // strike or log-moneyness, per AxisKind
    double value = 0.0; // vol or put price, per QuoteConvention
    std::size_t line = 0;
};

// Converts raw rows to (k, total vol), sorts them and builds the smile.
// annualized_vol requires expiry_years > 0; put_price rows are inverted
// through implied_vol and propagate NoVolSolution with the row number.
Smile ingest(const std::vector<RawQuote>& rows, const ForwardContext& ctx,
             QuoteConvention convention, AxisKind axis, double expiry_years = 0.0,
             TailPolicy tails = {});

// Parsed CSV: axis resolved from the header, convention when the header
// names it unambiguously (total_vol / vol / annualized_vol / put_price...).
struct CsvQuotes {
    AxisKind axis = AxisKind::log_moneyness;
    std::optional<QuoteConvention> convention;
    std::vector<RawQuote> rows;
};

// Header-driven CSV reader. '#' starts a comment, blank lines are skipped,
// the first remaining line names the columns. Malformed numeric cells raise
// UnparseableRow with the 1-based line number.
CsvQuotes read_quote_csv(std::istream& in);

// Writes "k,total_vol" rows at the given significant-digit precision.
void write_quote_csv(std::ostream& out, const Smile& smile, int digits = 12);

} // namespace volq
