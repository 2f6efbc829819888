#pragma once

#include "volq/smile.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace volq {

// European payoff of log-moneyness k = log(S_T / F). dpsi / d2psi may be
// empty; routes that need them throw MissingDerivative. polynomial_growth
// attests the moment conditions the pricing formulas assume; untrusted
// payoffs price only with it set. fd_probes / fd_step tune the consistency
// check of supplied derivatives against finite differences.
struct PayoffSpec {
    std::function<double(double)> psi;
    std::function<double(double)> dpsi;
    std::function<double(double)> d2psi;
    bool polynomial_growth = true;
    std::string name;
    std::vector<double> fd_probes; // empty picks a default spread of points
    std::optional<double> fd_step;

    static PayoffSpec log_contract();         // k
    static PayoffSpec power(int n);           // k^n, n >= 0
    static PayoffSpec exponential(double a);  // e^{a k}
    static PayoffSpec forward();              // e^k - 1
    static PayoffSpec spot_log();             // k e^k
    // C^1 Hermite interpolation of (k_i, psi_i); slopes from psi_slopes when
    // given. Constant beyond the table. Derivatives come from the same fit.
    static PayoffSpec tabulated(const std::vector<double>& k,
                                const std::vector<double>& psi_values,
                                const std::vector<double>& psi_slopes = {});
};

enum class Measure { cash, share };

struct ZGridSpec {
    double lo = -8.0;
    double hi = 8.0;
    std::size_t n = 201;
};

struct KGridSpec {
    std::size_t n = 2001; // composite Simpson nodes; forced odd
};

struct PricingDiagnostics {
    std::size_t z_nodes = 0;
    std::size_t k_nodes = 0;
    bool f1_certified = false;
    bool f2_certified = false;
};

// value = z_integral_part + k_integral_part always. tail_contribution is the
// slice of the z part coming from the constant extensions beyond the grid.
struct PricingResult {
    double value = 0.0;
    double z_integral_part = 0.0;
    double k_integral_part = 0.0;
    double tail_contribution = 0.0;
    PricingDiagnostics diagnostics;
};

// Fair variance-swap strike -2 E[log(S_T/F)] = int sigma_2(z)^2 phi(z) dz,
// by exact Gaussian integration of a Hermite cubic through z-space samples.
PricingResult variance_swap_strike(const Smile& smile, const ZGridSpec& zgrid = {});

// Fair gamma-swap strike 2 E[log(S_T/F) S_T/F] = int sigma_1(z)^2 phi(z) dz.
PricingResult gamma_swap_strike(const Smile& smile, const ZGridSpec& zgrid = {});

// Twice-differentiable route. cash measure:
//   E[Psi] = int {Psi(g2) - Psi'(g2)(g2 + sigma_2^2/2)} phi dz
//          + int Psi''(k) sigma(k) phi(f2(k)) dk,
// share measure mirrors with g1, sigma_1^2/2 sign flipped and phi(f1).
// The k integral runs composite Simpson over the span where the weight
// stays above 1e-16.
PricingResult price_smooth(const Smile& smile, const PayoffSpec& payoff, Measure measure,
                           const ZGridSpec& zgrid = {}, const KGridSpec& kgrid = {});

// Absolutely-continuous route, single z integral. cash:
//   E[Psi] = int {Psi(g2) - Psi'(g2) + Psi'(g1) e^{-g1}} phi dz,
// share:
//   E[Psi S_T/F] = int {Psi(g1) + Psi'(g1) - Psi'(g2) e^{g2}} phi dz.
PricingResult price_ac(const Smile& smile, const PayoffSpec& payoff, Measure measure,
                       const ZGridSpec& zgrid = {});

} // namespace volq
