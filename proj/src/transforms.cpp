#include "volq/transforms.hpp"

#include "volq/errors.hpp"
#include "volq/format.hpp"
#include "volq/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace volq {

FPair f_transforms(double k, double sigma) {
    if (!std::isfinite(k)) throw InvalidInput("f_transforms: k must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw InvalidInput("f_transforms: sigma must be positive and finite");
    double ratio = k / sigma;
    return {ratio - 0.5 * sigma, ratio + 0.5 * sigma};
}

namespace {

double f_along(Transform which, const Smile& smile, double k) {
    FPair f = f_transforms(k, smile.sigma_at(k));
    return which == Transform::first ? f.f1 : f.f2;
}

const char* transform_name(Transform which) {
    return which == Transform::first ? "f1" : "f2";
}

} // namespace

TransformGrid transform_grid(const Smile& smile, std::size_t n) {
    if (n < smile.quotes().size() || n < 2)
        throw InvalidInput("transform_grid: n must cover at least the quote nodes");

    std::vector<double> ks = linspace(smile.k_min(), smile.k_max(), n);
    for (const auto& q : smile.quotes()) ks.push_back(q.k);
    std::sort(ks.begin(), ks.end());
    double span = smile.k_max() - smile.k_min();
    std::vector<double> dedup;
    dedup.reserve(ks.size());
    for (double k : ks)
        if (dedup.empty() || k - dedup.back() > 1e-14 * span) dedup.push_back(k);

    TransformGrid grid;
    grid.rows.reserve(dedup.size());
    for (double k : dedup) {
        double s = smile.sigma_at(k);
        FPair f = f_transforms(k, s);
        grid.rows.push_back({k, s, f.f1, f.f2});
    }
    grid.f1_increasing = true;
    grid.f2_increasing = true;
    for (std::size_t i = 0; i + 1 < grid.rows.size(); ++i) {
        if (!(grid.rows[i + 1].f1 > grid.rows[i].f1)) grid.f1_increasing = false;
        if (!(grid.rows[i + 1].f2 > grid.rows[i].f2)) grid.f2_increasing = false;
    }
    return grid;
}

MonotoneCertificate certify_monotone(const Smile& smile, std::size_t density_multiple) {
    std::size_t n = std::max<std::size_t>(smile.quotes().size() * density_multiple, 401);
    TransformGrid grid = transform_grid(smile, n);

    MonotoneCertificate cert;
    cert.scan_points = grid.rows.size();
    cert.f1_increasing = grid.f1_increasing;
    cert.f2_increasing = grid.f2_increasing;
    for (std::size_t i = 0; i + 1 < grid.rows.size(); ++i) {
        const auto& a = grid.rows[i];
        const auto& b = grid.rows[i + 1];
        if (!cert.f1_violation && !(b.f1 > a.f1)) cert.f1_violation = {a.k, b.k};
        if (!cert.f2_violation && !(b.f2 > a.f2)) cert.f2_violation = {a.k, b.k};
    }
    return cert;
}

namespace {

void require_monotone(Transform which, const MonotoneCertificate& cert) {
    bool ok = which == Transform::first ? cert.f1_increasing : cert.f2_increasing;
    if (ok) return;
    auto viol = which == Transform::first ? cert.f1_violation : cert.f2_violation;
    double lo = viol ? viol->first : 0.0;
    double hi = viol ? viol->second : 0.0;
    throw NotMonotone(lo, hi,
                      std::string(transform_name(which)) + " decreases on k in [" +
                          format_sig(lo) + ", " + format_sig(hi) +
                          "]; the smile admits arbitrage and inversion is refused");
}

// Bisection for f_along(which, k) = z on a bracket with f(a) <= z <= f(b)
// up to orientation; f is continuous and z is attained inside.
double bisect_k(Transform which, const Smile& smile, double z, double lo, double hi) {
    double flo = f_along(which, smile, lo);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi));
         ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f_along(which, smile, mid);
        if ((fm <= z) == (flo <= z)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

double g_inverse(Transform which, const Smile& smile, double z,
                 const MonotoneCertificate* cert) {
    if (!std::isfinite(z)) throw InvalidInput("g_inverse: z must be finite");
    MonotoneCertificate local;
    if (!cert) {
        local = certify_monotone(smile);
        cert = &local;
    }
    require_monotone(which, *cert);

    double z_lo = f_along(which, smile, smile.k_min());
    double z_hi = f_along(which, smile, smile.k_max());

    if (z >= z_lo && z <= z_hi) return bisect_k(which, smile, z, smile.k_min(), smile.k_max());

    bool left = z < z_lo;
    const std::optional<double>& q =
        left ? smile.tails().q_left : smile.tails().q_right;
    double k_end = left ? smile.k_min() : smile.k_max();

    if (smile.tails().kind == TailKind::flat || !q) {
        // Constant tail vol: f is linear in k there, so invert in closed form.
        double s = smile.sigma_at(k_end);
        return which == Transform::first ? s * z + 0.5 * s * s : s * z - 0.5 * s * s;
    }

    double step = std::max(1.0, std::abs(k_end));
    double far = left ? k_end - step : k_end + step;
    while ((left ? f_along(which, smile, far) > z : f_along(which, smile, far) < z)) {
        step *= 2.0;
        far = left ? k_end - step : k_end + step;
        if (std::abs(far) > 1e12)
            throw NoBracket(std::string("g_inverse: ") + transform_name(which) +
                            " does not attain z = " + format_sig(z) +
                            " under the tail policy");
    }
    return left ? bisect_k(which, smile, z, far, k_end)
                : bisect_k(which, smile, z, k_end, far);
}

NormalizedPoint normalized_vol(Transform which, const Smile& smile, double z,
                               const MonotoneCertificate* cert) {
    double k = g_inverse(which, smile, z, cert);
    return {which, z, smile.sigma_at(k)};
}

FixedPointResult fixed_point(Transform which, const Smile& smile,
                             const MonotoneCertificate* cert) {
    MonotoneCertificate local;
    if (!cert) {
        local = certify_monotone(smile);
        cert = &local;
    }
    // z2* = f2(g1(0)) needs only the f1 inversion; z1* = f1(g2(0)) only f2.
    Transform invert = which == Transform::second ? Transform::first : Transform::second;
    double k = 0.0;
    try {
        k = g_inverse(invert, smile, 0.0, cert);
    } catch (const NoBracket&) {
        return {std::nullopt,
                std::string(transform_name(invert)) +
                    " never reaches 0 under the tail policy; the implied mass at zero "
                    "is too large for this fixed point"};
    }
    FPair f = f_transforms(k, smile.sigma_at(k));
    return {which == Transform::second ? f.f2 : f.f1, ""};
}

AlphaEnvelope alpha_envelope(Transform which, double z, double z0, double sigma_n_at_z0) {
    if (!std::isfinite(z) || !std::isfinite(z0))
        throw InvalidInput("alpha_envelope: z and z0 must be finite");
    if (!(sigma_n_at_z0 > 0.0) || !std::isfinite(sigma_n_at_z0))
        throw InvalidInput("alpha_envelope: anchor vol must be positive and finite");
    double s0 = sigma_n_at_z0;
    double cross = 2.0 * z0 * s0;
    double radicand =
        which == Transform::first ? s0 * s0 + cross + z * z : s0 * s0 - cross + z * z;
    if (radicand < 0.0)
        throw InvalidInput("alpha_envelope: negative radicand; the anchor cannot come "
                           "from a genuine normalized vol on this branch");
    double r = std::sqrt(radicand);
    return which == Transform::first ? AlphaEnvelope{-z + r, -z - r}
                                     : AlphaEnvelope{z + r, z - r};
}

} // namespace volq
