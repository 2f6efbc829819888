#pragma once

#include "volq/smile.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace volq {

// The two normalizing changes of variable. Along a smile,
//   f1(k) = k / sigma(k) - sigma(k) / 2 = -d1,
//   f2(k) = k / sigma(k) + sigma(k) / 2 = -d2.
// Algebra that holds pointwise: f2^2 - f1^2 = 2k and e^k phi(f2) = phi(f1).
enum class Transform { first, second };

struct FPair {
    double f1 = 0.0;
    double f2 = 0.0;
};

FPair f_transforms(double k, double sigma);

struct TransformRow {
    double k = 0.0;
    double sigma = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;
};

// Uniform n-point grid over the quoted range united with the quote nodes,
// with f1/f2 evaluated rowwise and strict-increase flags across rows.
struct TransformGrid {
    std::vector<TransformRow> rows;
    bool f1_increasing = false;
    bool f2_increasing = false;
};

TransformGrid transform_grid(const Smile& smile, std::size_t n);

// Dense-scan certificate over the quoted range. A violation records the
// k-interval of the first decrease. density_multiple scales the scan grid
// relative to the quote count.
struct MonotoneCertificate {
    bool f1_increasing = false;
    bool f2_increasing = false;
    std::optional<std::pair<double, double>> f1_violation;
    std::optional<std::pair<double, double>> f2_violation;
    std::size_t scan_points = 0;
};

MonotoneCertificate certify_monotone(const Smile& smile, std::size_t density_multiple = 20);

// Solves f_which(k, sigma(k)) = z for k. Inside the quoted range this needs
// the certified monotonicity of the chosen transform (throws NotMonotone
// with the violating interval otherwise); beyond it the tail policy applies,
// with a closed form under flat tails. Throws NoBracket when z is not
// attained. Passing a precomputed certificate skips the rescan.
double g_inverse(Transform which, const Smile& smile, double z,
                 const MonotoneCertificate* cert = nullptr);

// Normalized vol sigma_n(z) = sigma(g_which(z)).
struct NormalizedPoint {
    Transform which = Transform::first;
    double z = 0.0;
    double sigma_n = 0.0;
};

NormalizedPoint normalized_vol(Transform which, const Smile& smile, double z,
                               const MonotoneCertificate* cert = nullptr);

// Fixed points of the normalized vols: sigma_2 at z2* = f2(g1(0)) satisfies
// sigma_2(z2*) = z2* and always exists; sigma_1 at z1* = f1(g2(0)) satisfies
// sigma_1(z1*) = -z1* and exists only when f2 attains 0 (no pinned mass at
// zero under the tail policy). reason explains an absent value.
struct FixedPointResult {
    std::optional<double> z_star;
    std::string reason;
};

FixedPointResult fixed_point(Transform which, const Smile& smile,
                             const MonotoneCertificate* cert = nullptr);

// Two-sided envelope for a normalized vol anchored at (z0, sigma_n(z0)):
//   first:  alpha = -z +- sqrt(s0^2 + 2 z0 s0 + z^2)
//   second: alpha =  z +- sqrt(s0^2 - 2 z0 s0 + z^2)
// A negative radicand cannot arise from genuine normalized vols on the
// proposition's branches and is rejected as inconsistent input.
struct AlphaEnvelope {
    double plus = 0.0;
    double minus = 0.0;
};

AlphaEnvelope alpha_envelope(Transform which, double z, double z0, double sigma_n_at_z0);

} // namespace volq
