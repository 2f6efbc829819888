#include "volq/bounds.hpp"

#include "volq/errors.hpp"
#include "volq/format.hpp"
#include "volq/normal.hpp"
#include "volq/transforms.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace volq {

namespace {

constexpr double kEightOverPi = 2.5464790894703253723;

// Accumulates the worst (smallest) margin and where it happened.
struct Worst {
    double margin = std::numeric_limits<double>::infinity();
    double k_lo = 0.0;
    double k_hi = 0.0;
    bool any = false;

    void offer(double m, double lo, double hi) {
        if (!any || m < margin) {
            margin = m;
            k_lo = lo;
            k_hi = hi;
        }
        any = true;
    }

    CheckResult result(const std::string& name, bool heuristic,
                       const std::string& empty_note) const {
        CheckResult out;
        out.name = name;
        out.heuristic = heuristic;
        if (!any) {
            out.margin = std::numeric_limits<double>::quiet_NaN();
            out.passed = true;
            out.note = empty_note;
            return out;
        }
        out.k_lo = k_lo;
        out.k_hi = k_hi;
        out.margin = margin;
        out.passed = margin >= 0.0;
        return out;
    }
};

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void monotone_check(const TransformGrid& grid, bool use_f1, BoundsReport& report) {
    Worst worst;
    for (std::size_t i = 0; i + 1 < grid.rows.size(); ++i) {
        const auto& a = grid.rows[i];
        const auto& b = grid.rows[i + 1];
        double diff = use_f1 ? b.f1 - a.f1 : b.f2 - a.f2;
        worst.offer(diff, a.k, b.k);
    }
    report.checks.push_back(
        worst.result(use_f1 ? "f1_monotone" : "f2_monotone", false, "fewer than 2 rows"));
}

void wing_slope_checks(const Smile& smile, BoundsReport& report) {
    const auto& q = smile.quotes();
    Worst left, right;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
        double k0 = q[i].k, k1 = q[i + 1].k;
        if (k1 <= 0.0) {
            double a0 = std::sqrt(2.0 * -k0) - q[i].sigma;
            double a1 = std::sqrt(2.0 * -k1) - q[i + 1].sigma;
            left.offer(a0 - a1, k0, k1);
        }
        if (k0 >= 0.0) {
            double a0 = std::sqrt(2.0 * k0) - q[i].sigma;
            double a1 = std::sqrt(2.0 * k1) - q[i + 1].sigma;
            right.offer(a1 - a0, k0, k1);
        }
    }
    report.checks.push_back(
        left.result("left_wing_slope", false, "no quote pair with k <= 0"));
    report.checks.push_back(
        right.result("right_wing_slope", false, "no quote pair with k >= 0"));
}

void refined_skew_check(const Smile& smile, const TransformGrid& grid,
                        BoundsReport& report) {
    Worst worst;
    for (const auto& row : grid.rows) {
        double root = std::sqrt(2.0 * std::abs(row.k));
        double bound = 2.0 / (root + std::sqrt(root * root + kEightOverPi));
        double slope = sgn(row.k) * smile.sigma_slope_at(row.k);
        worst.offer(bound - slope, row.k, row.k);
    }
    report.checks.push_back(worst.result("as_refined_skew", true, "empty grid"));
}

void v_slope_checks(const Smile& smile, const TransformGrid& grid,
                    const BoundsOptions& opts, BoundsReport& report) {
    Worst plain;
    for (const auto& row : grid.rows) {
        double vp = 2.0 * row.sigma * smile.sigma_slope_at(row.k);
        if (row.k <= 0.0) {
            plain.offer(vp + 4.0, row.k, row.k);
            if (row.k < 0.0)
                plain.offer(vp + 2.0 * row.sigma / std::sqrt(2.0 * -row.k), row.k, row.k);
        }
        if (row.k >= 0.0) plain.offer(4.0 - vp, row.k, row.k);
    }
    report.checks.push_back(plain.result("rt_v_slope", true, "empty grid"));

    // Wing-anchored sharpening: the bound at k built from one quote k0 on the
    // same wing with sigma(k0) strictly inside sqrt(2|k0|).
    auto pick_anchor = [&](bool leftside) -> std::optional<double> {
        if (leftside && opts.k_star_left) return opts.k_star_left;
        if (!leftside && opts.k_star_right) return opts.k_star_right;
        std::optional<double> best;
        for (const auto& quote : smile.quotes()) {
            if (leftside ? quote.k >= 0.0 : quote.k <= 0.0) continue;
            if (quote.sigma < std::sqrt(2.0 * std::abs(quote.k))) {
                if (!best || (leftside ? quote.k < *best : quote.k > *best)) best = quote.k;
            }
        }
        return best;
    };

    std::optional<double> kl = pick_anchor(true);
    std::optional<double> kr = pick_anchor(false);
    Worst anchored;
    std::ostringstream note;
    if (kl) {
        double gap = std::sqrt(2.0 * -*kl) - smile.sigma_at(*kl);
        for (const auto& row : grid.rows) {
            if (row.k > *kl) continue;
            double vp = 2.0 * row.sigma * smile.sigma_slope_at(row.k);
            double bound = -2.0 * (1.0 - gap / std::sqrt(2.0 * -row.k));
            anchored.offer(vp - bound, row.k, row.k);
        }
        note << "left anchor k0 = " << format_sig(*kl);
    }
    if (kr) {
        double gap = std::sqrt(2.0 * *kr) - smile.sigma_at(*kr);
        for (const auto& row : grid.rows) {
            if (row.k < *kr) continue;
            double vp = 2.0 * row.sigma * smile.sigma_slope_at(row.k);
            double bound = 2.0 * (1.0 - gap / std::sqrt(2.0 * row.k));
            anchored.offer(bound - vp, row.k, row.k);
        }
        if (kl) note << "; ";
        note << "right anchor k0 = " << format_sig(*kr);
    }
    CheckResult res = anchored.result(
        "rt_v_slope_anchored", true,
        "no quote with sigma(k0) < sqrt(2|k0|) to anchor the sharpened bound");
    if (anchored.any) res.note = note.str();
    report.checks.push_back(res);
}

void lee_wing_check(const TransformGrid& grid, double q, bool leftside,
                    BoundsReport& report) {
    std::string name = leftside ? "lee_wing_left" : "lee_wing_right";
    if (!(q > 0.0) || !(q < 2.0))
        throw InvalidInput(name + ": q must lie in (0, 2)");
    double edge = 1.0 / (2.0 - q);
    double c_inner = 1.0 / std::sqrt(q) + 0.5 * std::sqrt(q); // 1/sqrt(q) + sqrt(q)/2
    double c_outer = std::sqrt(2.0) - std::sqrt(q);           // sqrt(2) - sqrt(q)

    Worst worst;
    for (const auto& row : grid.rows) {
        double k = row.k;
        if (leftside ? k < -edge : k > edge) {
            double rk = std::sqrt(std::abs(k));
            worst.offer(std::sqrt(q * std::abs(k)) - row.sigma, k, k);
            if (leftside) {
                worst.offer(-c_inner * rk - row.f1, k, k);
                worst.offer(-c_outer * rk - row.f2, k, k);
            } else {
                worst.offer(row.f1 - c_outer * rk, k, k);
                worst.offer(row.f2 - c_inner * rk, k, k);
            }
        }
        // Inverse-growth caps read off the same rows: g1(f1(k)) = k, g2(f2(k)) = k.
        if (leftside) {
            if (row.f1 < -edge) worst.offer(k + row.f1 * row.f1 / c_inner, k, k);
            if (row.f2 < -edge) worst.offer(k + row.f2 * row.f2 / c_outer, k, k);
        } else {
            if (row.f1 > edge) worst.offer(row.f1 * row.f1 / c_outer - k, k, k);
            if (row.f2 > edge) worst.offer(row.f2 * row.f2 / c_inner - k, k, k);
        }
    }
    report.checks.push_back(worst.result(
        name, false, "no grid rows beyond |k| or |z| > 1/(2-q) = " + format_sig(edge)));
}

} // namespace

double mass_at_zero_bound(const Smile& smile) {
    double k = smile.k_min();
    FPair f = f_transforms(k, smile.sigma_at(k));
    return norm_cdf(f.f2);
}

BoundsReport check_smile(const Smile& smile, const BoundsOptions& opts) {
    std::size_t n = opts.grid_size
                        ? std::max(opts.grid_size, smile.quotes().size())
                        : std::max<std::size_t>(2 * smile.quotes().size() + 1, 101);
    TransformGrid grid = transform_grid(smile, n);

    BoundsReport report;
    monotone_check(grid, true, report);
    monotone_check(grid, false, report);
    wing_slope_checks(smile, report);
    refined_skew_check(smile, grid, report);
    v_slope_checks(smile, grid, opts, report);
    if (opts.q_left) lee_wing_check(grid, *opts.q_left, true, report);
    if (opts.q_right) lee_wing_check(grid, *opts.q_right, false, report);

    Worst atm;
    atm.offer(smile.raw_sigma_at(0.0), 0.0, 0.0);
    CheckResult atm_res = atm.result("atm_positive", false, "");
    if (0.0 < smile.k_min() || 0.0 > smile.k_max())
        atm_res.note = "k = 0 lies outside the quoted range; tail value used";
    report.checks.push_back(atm_res);

    report.mass_at_zero = mass_at_zero_bound(smile);
    report.clean = true;
    for (const auto& c : report.checks) report.clean = report.clean && c.passed;
    return report;
}

std::string report_to_json(const BoundsReport& report) {
    nlohmann::ordered_json doc;
    doc["overall"] = report.clean ? "clean" : "violations";
    doc["mass_at_zero"] = round_sig(report.mass_at_zero);
    doc["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
        nlohmann::ordered_json item;
        item["check"] = c.name;
        item["location"] = {{"k_lo", round_sig(c.k_lo)}, {"k_hi", round_sig(c.k_hi)}};
        item["margin"] = round_sig(c.margin);
        item["passed"] = c.passed;
        item["heuristic"] = c.heuristic;
        if (!c.note.empty()) item["note"] = c.note;
        doc["checks"].push_back(std::move(item));
    }
    return doc.dump(2);
}

std::string report_to_csv(const BoundsReport& report) {
    std::ostringstream out;
    out << "check,k_lo,k_hi,margin,passed,heuristic,note\n";
    for (const auto& c : report.checks) {
        std::string note = c.note;
        std::replace(note.begin(), note.end(), ',', ';');
        out << c.name << ',' << format_sig(c.k_lo) << ',' << format_sig(c.k_hi) << ','
            << format_sig(c.margin) << ',' << (c.passed ? "true" : "false") << ','
            << (c.heuristic ? "true" : "false") << ',' << note << '\n';
    }
    return out.str();
}

} // namespace volq
