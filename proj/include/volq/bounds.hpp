#pragma once

#include "volq/smile.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace volq {

// One diagnostic outcome. margin is the signed distance to the bound over
// the worst evaluation point (negative means violated); location is the k
// interval (or point, k_lo == k_hi) where that worst margin occurred.
// heuristic marks checks that consume the fitted slope rather than the raw
// quotes. A check with nothing to evaluate passes with a NaN margin and an
// explanatory note.
struct CheckResult {
    std::string name;
    double k_lo = 0.0;
    double k_hi = 0.0;
    double margin = 0.0;
    bool passed = true;
    bool heuristic = false;
    std::string note;
};

struct BoundsReport {
    std::vector<CheckResult> checks;
    double mass_at_zero = 0.0; // upper estimate Phi(f2(k_min))
    bool clean = true;         // all checks passed
};

struct BoundsOptions {
    // Wing growth rates for the large-moneyness checks; a side without q
    // skips its wing check.
    std::optional<double> q_left;
    std::optional<double> q_right;
    // Anchor overrides for the sharpened slope bound; by default the
    // outermost quote on each side that sits strictly below sqrt(2|k|).
    std::optional<double> k_star_left;
    std::optional<double> k_star_right;
    // Scan grid size; 0 picks max(2 * quotes + 1, 101).
    std::size_t grid_size = 0;
};

// Runs every applicable no-arbitrage diagnostic on the smile:
//   f1_monotone, f2_monotone         transform rows must strictly increase
//   left_wing_slope, right_wing_slope  sqrt(2|k|) - sigma monotone toward the wing
//   as_refined_skew                  fitted slope against the refined sqrt bound
//   rt_v_slope                       V = sigma^2 slope within +-4, sharpened near wings
//   rt_v_slope_anchored              wing-anchored sharpening of the same slope
//   lee_wing_left, lee_wing_right    sigma, f1, f2 and inverse growth caps beyond
//                                    |k| > 1/(2-q)  (only when q supplied)
//   atm_positive                     interpolated sigma(0) > 0
BoundsReport check_smile(const Smile& smile, const BoundsOptions& opts = {});

// Upper estimate of the implied probability of S_T = 0: Phi(f2) at the
// lowest quote, a conservative stand-in for the k -> -inf limit.
double mass_at_zero_bound(const Smile& smile);

// Serialized report, stable field order.
std::string report_to_json(const BoundsReport& report);
std::string report_to_csv(const BoundsReport& report);

} // namespace volq
