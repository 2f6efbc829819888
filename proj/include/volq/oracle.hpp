#pragma once

#include "volq/pricing.hpp"
#include "volq/smile.hpp"

#include <string>
#include <vector>

namespace volq::oracle {

// Finite mixture of lognormals: S_T = F_i e^{-s_i^2/2 + s_i X} with weight
// w_i, X standard normal. Closed-form puts, strictly positive density, all
// positive and negative moments finite, no mass at zero: every hypothesis of
// the pricing formulas holds and is checkable.
struct MixtureComponent {
    double weight = 0.0;
    double forward = 0.0;
    double vol = 0.0; // total vol over the expiry
};

struct MixtureModel {
    std::string name;
    std::vector<MixtureComponent> components;

    double forward() const; // sum of w_i F_i
    void validate() const;  // weights in (0,1] summing to 1, F_i > 0, s_i > 0
};

// Exact undiscounted put: sum of w_i BlackScholesPut(F_i, log(K/F_i), s_i).
double mixture_put(const MixtureModel& model, double strike);

// Weighted Black-Scholes call at an absolute strike, assembled per component
// so no cross-component cancellation occurs.
double mixture_call(const MixtureModel& model, double strike);

// Inverts mixture puts at strikes ctx.forward * e^k into a Smile.
Smile gen_smile(const MixtureModel& model, const std::vector<double>& kgrid,
                const ForwardContext& ctx, TailPolicy tails = {});
Smile gen_smile(const MixtureModel& model, const std::vector<double>& kgrid,
                TailPolicy tails = {});

// Brute-force expectation against the mixture density by adaptive
// Gauss-Kronrod quadrature. cash: E[psi(log S/F)]; share: the same
// expectation weighted by S/F. Relative error target 1e-9.
double density_expectation(const MixtureModel& model, const PayoffSpec& payoff,
                           Measure measure);

// Strike-space static replication against the smile's interpolated puts:
//   psi(0) + int_0^F (psi'' - psi') P(K)/K^2 dK
//          + int_F^inf (psi'' - psi') C(K)/K^2 dK,
// truncated where the option-over-strike weight falls below the 1e-12
// Phi-tail. Independent of the z-space machinery.
double replication_expectation(const Smile& smile, const PayoffSpec& payoff);

// Pinned six-model corpus shared by tests, fixtures and the synth command.
const std::vector<MixtureModel>& builtin_corpus();
const MixtureModel& corpus_model(const std::string& name);

// The corpus sampling grid (k in [-2.5, 2.5], 201 quotes) and its smile.
std::vector<double> corpus_kgrid();
Smile corpus_smile(const MixtureModel& model, TailPolicy tails = {});

// JSON fixture list: [{"name": ..., "weights": [...], "forwards": [...],
// "vols": [...]}, ...].
std::vector<MixtureModel> load_mixtures(const std::string& path);

} // namespace volq::oracle
