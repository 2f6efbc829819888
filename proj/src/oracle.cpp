#include "volq/oracle.hpp"

#include "volq/errors.hpp"
#include "volq/format.hpp"
#include "volq/normal.hpp"
#include "volq/quadrature.hpp"
#include "volq/transforms.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace volq::oracle {

namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;

double checked_integral(const std::function<double(double)>& f, double a, double b,
                        const char* what) {
    double err = 0.0;
    double val = Quad::integrate(f, a, b, 12, 1e-13, &err);
    if (err > std::max(1e-8 * std::abs(val), 1e-10))
        throw Error(std::string(what) + ": quadrature did not converge, error bound " +
                    format_sig(err, 3));
    return val;
}

} // namespace

double MixtureModel::forward() const {
    double f = 0.0;
    for (const auto& c : components) f += c.weight * c.forward;
    return f;
}

void MixtureModel::validate() const {
    if (components.empty()) throw InvalidInput("mixture: needs at least one component");
    double wsum = 0.0;
    for (const auto& c : components) {
        if (!(c.weight > 0.0) || c.weight > 1.0)
            throw InvalidInput("mixture: weights must lie in (0, 1]");
        if (!(c.forward > 0.0) || !std::isfinite(c.forward))
            throw InvalidInput("mixture: component forwards must be positive");
        if (!(c.vol > 0.0) || !std::isfinite(c.vol))
            throw InvalidInput("mixture: component vols must be positive");
        wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw InvalidInput("mixture: weights sum to " + format_sig(wsum, 17) + ", not 1");
}

double mixture_put(const MixtureModel& model, double strike) {
    model.validate();
    if (!(strike > 0.0) || !std::isfinite(strike))
        throw InvalidInput("mixture_put: strike must be positive");
    double value = 0.0;
    for (const auto& c : model.components) {
        ForwardContext ctx{c.forward, ""};
        value += c.weight * bs_put(ctx, std::log(strike / c.forward), c.vol);
    }
    return value;
}

double mixture_call(const MixtureModel& model, double strike) {
    model.validate();
    if (!(strike > 0.0) || !std::isfinite(strike))
        throw InvalidInput("mixture_call: strike must be positive");
    double value = 0.0;
    for (const auto& c : model.components) {
        ForwardContext ctx{c.forward, ""};
        value += c.weight * bs_call(ctx, std::log(strike / c.forward), c.vol);
    }
    return value;
}

Smile gen_smile(const MixtureModel& model, const std::vector<double>& kgrid,
                const ForwardContext& ctx, TailPolicy tails) {
    model.validate();
    for (std::size_t i = 0; i + 1 < kgrid.size(); ++i)
        if (!(kgrid[i] < kgrid[i + 1]))
            throw InvalidInput("gen_smile: kgrid must strictly increase");
    std::vector<VolQuote> quotes;
    quotes.reserve(kgrid.size());
    for (double k : kgrid) {
        // Quote off the OTM side: deep ITM the optional value drowns in the
        // intrinsic part and the vol cannot be recovered in double precision.
        double strike = ctx.forward * std::exp(k);
        double value =
            k > 0.0 ? mixture_call(model, strike) : mixture_put(model, strike);
        quotes.push_back({k, implied_vol_otm(ctx, k, value)});
    }
    return Smile(ctx, std::move(quotes), tails);
}

Smile gen_smile(const MixtureModel& model, const std::vector<double>& kgrid,
                TailPolicy tails) {
    return gen_smile(model, kgrid, ForwardContext{model.forward(), model.name}, tails);
}

double density_expectation(const MixtureModel& model, const PayoffSpec& payoff,
                           Measure measure) {
    model.validate();
    if (!payoff.psi) throw InvalidInput("density_expectation: psi is required");
    double F = model.forward();

    // Component i contributes psi(c_i + s_i x) under cash and, after the
    // Gaussian shift x -> x + s_i, psi(c_i + s_i^2 + s_i x) times F_i/F
    // under share; both against the standard normal density.
    auto integrand = [&](double x) {
        double acc = 0.0;
        for (const auto& c : model.components) {
            double off = std::log(c.forward / F) - 0.5 * c.vol * c.vol;
            if (measure == Measure::cash)
                acc += c.weight * payoff.psi(off + c.vol * x);
            else
                acc += c.weight * (c.forward / F) *
                       payoff.psi(off + c.vol * c.vol + c.vol * x);
        }
        return acc * norm_pdf(x);
    };
    return checked_integral(integrand, -12.0, 12.0, "density_expectation");
}

double replication_expectation(const Smile& smile, const PayoffSpec& payoff) {
    if (!payoff.psi) throw InvalidInput("replication_expectation: psi is required");
    if (!payoff.dpsi || !payoff.d2psi)
        throw MissingDerivative(
            "replication_expectation: dpsi and d2psi are both required");

    double F = smile.ctx().forward;
    auto put_over_strike = [&](double k) {
        // P(K)/K for K = F e^k, from the smile's interpolated vol.
        return bs_put(smile.ctx(), k, smile.sigma_at(k)) / (F * std::exp(k));
    };
    auto weight = [&](double k) { return payoff.d2psi(k) - payoff.dpsi(k); };

    // March outward until the option-over-strike factor is below the 1e-12
    // Phi tail; P/K <= Phi(f2) on the left, C/K <= Phi(-f1) on the right.
    double k_lo = std::min(smile.k_min(), 0.0);
    for (int i = 0; i < 400; ++i) {
        FPair f = f_transforms(k_lo, smile.sigma_at(k_lo));
        if (norm_cdf(f.f2) < 1e-12) break;
        k_lo -= 0.5;
    }
    double k_hi = std::max(smile.k_max(), 0.0);
    for (int i = 0; i < 400; ++i) {
        FPair f = f_transforms(k_hi, smile.sigma_at(k_hi));
        if (norm_cdf(-f.f1) < 1e-12) break;
        k_hi += 0.5;
    }

    double below = checked_integral(
        [&](double k) { return weight(k) * put_over_strike(k); }, k_lo, 0.0,
        "replication_expectation (puts)");
    double above = checked_integral(
        [&](double k) {
            double call_over_strike = put_over_strike(k) + std::exp(-k) - 1.0;
            return weight(k) * call_over_strike;
        },
        0.0, k_hi, "replication_expectation (calls)");
    return payoff.psi(0.0) + below + above;
}

const std::vector<MixtureModel>& builtin_corpus() {
    static const std::vector<MixtureModel> corpus = {
        {"flat_20", {{1.0, 1.0, 0.20}}},
        {"flat_50", {{1.0, 1.0, 0.50}}},
        {"eqf_2mix", {{0.5, 1.0, 0.10}, {0.5, 1.0, 0.30}}},
        {"skew_2mix", {{0.5, 0.9, 0.15}, {0.5, 1.1, 0.35}}},
        {"three_mix", {{0.3, 0.85, 0.12}, {0.4, 1.0, 0.20}, {0.3, 1.15, 0.30}}},
        {"lowvol_2mix", {{0.9, 1.0, 0.25}, {0.1, 1.0, 0.10}}},
    };
    return corpus;
}

const MixtureModel& corpus_model(const std::string& name) {
    for (const auto& m : builtin_corpus())
        if (m.name == name) return m;
    throw InvalidInput("unknown corpus model '" + name + "'");
}

std::vector<double> corpus_kgrid() { return linspace(-2.5, 2.5, 201); }

Smile corpus_smile(const MixtureModel& model, TailPolicy tails) {
    return gen_smile(model, corpus_kgrid(), tails);
}

std::vector<MixtureModel> load_mixtures(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open mixture fixture file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("fixture '" + path + "': " + e.what());
    }
    if (!doc.is_array()) throw InvalidInput("fixture '" + path + "': expected a JSON list");

    std::vector<MixtureModel> models;
    for (const auto& item : doc) {
        MixtureModel m;
        m.name = item.value("name", "");
        if (!item.contains("weights") || !item.contains("forwards") ||
            !item.contains("vols"))
            throw InvalidInput("fixture '" + path +
                               "': each model needs weights, forwards and vols");
        auto w = item["weights"].get<std::vector<double>>();
        auto f = item["forwards"].get<std::vector<double>>();
        auto v = item["vols"].get<std::vector<double>>();
        if (w.size() != f.size() || w.size() != v.size())
            throw InvalidInput("fixture '" + path + "': column sizes differ in model '" +
                               m.name + "'");
        for (std::size_t i = 0; i < w.size(); ++i) m.components.push_back({w[i], f[i], v[i]});
        m.validate();
        models.push_back(std::move(m));
    }
    return models;
}

} // namespace volq::oracle
