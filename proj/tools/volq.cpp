#include "volq/bounds.hpp"
#include "volq/errors.hpp"
#include "volq/format.hpp"
#include "volq/oracle.hpp"
#include "volq/pricing.hpp"
#include "volq/quadrature.hpp"
#include "volq/smile.hpp"
#include "volq/transforms.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using volq::format_sig;
using volq::round_sig;
using json = nlohmann::ordered_json;

// Everything the five subcommands share: smile construction inputs, grids,
// payoff selection and output routing.
struct Options {
    std::string input;
    std::string output;
    std::string format;
    double forward = 1.0;
    double expiry_years = 0.0;
    std::string convention; // iv-annual | iv-total | put-price | (csv header)
    std::string tail = "flat";
    double q_left = 0.0, q_right = 0.0;
    bool has_q_left = false, has_q_right = false;
    std::string zgrid_text;
    std::size_t kgrid_n = 2001;
    std::size_t grid_n = 101;
    std::string swap_kind;
    std::string payoff_text;
    std::string measure = "cash";
    std::string method = "auto";
    // synth
    std::string model_name;
    std::string fixture_path;
    double synth_lo = -2.5, synth_hi = 2.5;
    std::size_t synth_n = 201;
    // bounds extras
    double k_star_left = 0.0, k_star_right = 0.0;
    bool has_k_star_left = false, has_k_star_right = false;
};

// The --format default differs per subcommand (reports default to json, tables
// to csv), so it is resolved after parsing rather than at registration.
std::string pick_format(const Options& opt, const char* fallback) {
    std::string fmt = opt.format.empty() ? fallback : opt.format;
    if (fmt != "csv" && fmt != "json")
        throw volq::InvalidInput("--format: expected csv or json");
    return fmt;
}

void emit(const Options& opt, const std::string& text) {
    if (opt.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opt.output);
    if (!out) throw volq::InvalidInput("--output: cannot write '" + opt.output + "'");
    out << text;
}

volq::TailPolicy tail_policy(const Options& opt) {
    volq::TailPolicy tails;
    if (opt.tail == "flat") {
        tails.kind = volq::TailKind::flat;
    } else if (opt.tail == "lee") {
        tails.kind = volq::TailKind::lee_wing;
        if (!opt.has_q_left && !opt.has_q_right)
            throw volq::InvalidInput("--tail lee needs --q-left and/or --q-right");
    } else {
        throw volq::InvalidInput("--tail: expected flat or lee");
    }
    if (opt.has_q_left) tails.q_left = opt.q_left;
    if (opt.has_q_right) tails.q_right = opt.q_right;
    return tails;
}

volq::Smile load_smile(const Options& opt) {
    std::ifstream in(opt.input);
    if (!in) throw volq::InvalidInput("input: cannot open '" + opt.input + "'");
    volq::CsvQuotes csv = volq::read_quote_csv(in);

    std::optional<volq::QuoteConvention> convention = csv.convention;
    if (!opt.convention.empty()) {
        if (opt.convention == "iv-annual")
            convention = volq::QuoteConvention::annualized_vol;
        else if (opt.convention == "iv-total")
            convention = volq::QuoteConvention::total_vol;
        else if (opt.convention == "put-price")
            convention = volq::QuoteConvention::put_price;
        else
            throw volq::InvalidInput(
                "--convention: expected iv-annual, iv-total or put-price");
    }
    if (!convention)
        throw volq::InvalidInput(
            "quote convention is ambiguous; pass --convention or name the CSV value "
            "column total_vol / vol / put_price");

    volq::ForwardContext ctx{opt.forward, ""};
    return volq::ingest(csv.rows, ctx, *convention, csv.axis, opt.expiry_years,
                        tail_policy(opt));
}

volq::ZGridSpec parse_zgrid(const std::string& text, const volq::ZGridSpec& fallback) {
    if (text.empty()) return fallback;
    volq::ZGridSpec out;
    char c1 = 0, c2 = 0;
    std::istringstream s(text);
    long long n = 0;
    if (!(s >> out.lo >> c1 >> out.hi >> c2 >> n) || c1 != ':' || c2 != ':' || !s.eof() ||
        n < 2)
        throw volq::InvalidInput("--z-grid: expected lo:hi:n, got '" + text + "'");
    out.n = static_cast<std::size_t>(n);
    return out;
}

volq::PayoffSpec parse_payoff(const std::string& text) {
    if (text == "log") return volq::PayoffSpec::log_contract();
    if (text == "forward") return volq::PayoffSpec::forward();
    if (text == "spot-log") return volq::PayoffSpec::spot_log();
    auto colon = text.find(':');
    if (colon != std::string::npos) {
        std::string head = text.substr(0, colon);
        std::string arg = text.substr(colon + 1);
        if (head == "power") {
            try {
                std::size_t used = 0;
                int n = std::stoi(arg, &used);
                if (used != arg.size()) throw std::invalid_argument(arg);
                return volq::PayoffSpec::power(n);
            } catch (const std::exception&) {
                throw volq::InvalidInput("--payoff power:n needs an integer n");
            }
        }
        if (head == "exp") {
            try {
                std::size_t used = 0;
                double a = std::stod(arg, &used);
                if (used != arg.size()) throw std::invalid_argument(arg);
                return volq::PayoffSpec::exponential(a);
            } catch (const std::exception&) {
                throw volq::InvalidInput("--payoff exp:a needs a real a");
            }
        }
        if (head == "table") {
            std::ifstream in(arg);
            if (!in)
                throw volq::InvalidInput("--payoff table: cannot open '" + arg + "'");
            // Header k,psi[,dpsi]; same comment and separator rules as quote CSV.
            std::string line;
            std::size_t line_no = 0;
            long k_col = -1, psi_col = -1, dpsi_col = -1;
            std::vector<double> ks, psis, dpsis;
            while (std::getline(in, line)) {
                ++line_no;
                if (!line.empty() && line.back() == '\r') line.pop_back();
                auto hash = line.find('#');
                if (hash != std::string::npos) line.erase(hash);
                std::istringstream row(line);
                std::string cell;
                std::vector<std::string> cells;
                while (std::getline(row, cell, ',')) {
                    cell.erase(0, cell.find_first_not_of(" \t"));
                    cell.erase(cell.find_last_not_of(" \t") + 1);
                    cells.push_back(cell);
                }
                while (!cells.empty() && cells.back().empty()) cells.pop_back();
                if (cells.empty()) continue;
                if (k_col < 0) {
                    for (std::size_t i = 0; i < cells.size(); ++i) {
                        if (cells[i] == "k") k_col = static_cast<long>(i);
                        if (cells[i] == "psi") psi_col = static_cast<long>(i);
                        if (cells[i] == "dpsi") dpsi_col = static_cast<long>(i);
                    }
                    if (k_col < 0 || psi_col < 0)
                        throw volq::InvalidInput(
                            "--payoff table: header must name columns k,psi[,dpsi]");
                    continue;
                }
                try {
                    ks.push_back(std::stod(cells.at(static_cast<std::size_t>(k_col))));
                    psis.push_back(std::stod(cells.at(static_cast<std::size_t>(psi_col))));
                    if (dpsi_col >= 0)
                        dpsis.push_back(
                            std::stod(cells.at(static_cast<std::size_t>(dpsi_col))));
                } catch (const std::exception&) {
                    throw volq::UnparseableRow(line_no,
                                               "payoff table line " +
                                                   std::to_string(line_no) +
                                                   ": cannot parse row");
                }
            }
            return volq::PayoffSpec::tabulated(ks, psis, dpsis);
        }
    }
    throw volq::InvalidInput(
        "--payoff: expected log, forward, spot-log, power:n, exp:a or table:path");
}

volq::Measure parse_measure(const std::string& text) {
    if (text == "cash") return volq::Measure::cash;
    if (text == "share") return volq::Measure::share;
    throw volq::InvalidInput("--measure: expected cash or share");
}

int run_check(const Options& opt) {
    volq::Smile smile = load_smile(opt);
    volq::BoundsOptions bopts;
    if (opt.has_q_left) bopts.q_left = opt.q_left;
    if (opt.has_q_right) bopts.q_right = opt.q_right;
    if (opt.has_k_star_left) bopts.k_star_left = opt.k_star_left;
    if (opt.has_k_star_right) bopts.k_star_right = opt.k_star_right;
    if (opt.grid_n) bopts.grid_size = opt.grid_n;
    volq::BoundsReport report = volq::check_smile(smile, bopts);
    emit(opt, pick_format(opt, "json") == "csv" ? volq::report_to_csv(report)
                                                : volq::report_to_json(report) + "\n");
    return report.clean ? 0 : 2;
}

int run_transform(const Options& opt) {
    volq::Smile smile = load_smile(opt);
    volq::TransformGrid grid =
        volq::transform_grid(smile, std::max(opt.grid_n, smile.quotes().size()));
    volq::MonotoneCertificate cert = volq::certify_monotone(smile);
    volq::ZGridSpec zspec = parse_zgrid(opt.zgrid_text, {-3.0, 3.0, 25});

    struct ZRow {
        double z, sigma1, sigma2, g1, g2;
    };
    std::vector<ZRow> zrows;
    if (cert.f1_increasing && cert.f2_increasing) {
        for (double z : volq::linspace(zspec.lo, zspec.hi, zspec.n)) {
            double g1 = volq::g_inverse(volq::Transform::first, smile, z, &cert);
            double g2 = volq::g_inverse(volq::Transform::second, smile, z, &cert);
            zrows.push_back({z, smile.sigma_at(g1), smile.sigma_at(g2), g1, g2});
        }
    }
    volq::FixedPointResult z1;
    volq::FixedPointResult z2;
    if (cert.f2_increasing) z1 = volq::fixed_point(volq::Transform::first, smile, &cert);
    if (cert.f1_increasing) z2 = volq::fixed_point(volq::Transform::second, smile, &cert);

    if (pick_format(opt, "csv") == "csv") {
        std::ostringstream out;
        out << "# transform grid\n";
        out << "k,sigma,f1,f2\n";
        for (const auto& r : grid.rows)
            out << format_sig(r.k) << ',' << format_sig(r.sigma) << ',' << format_sig(r.f1)
                << ',' << format_sig(r.f2) << '\n';
        out << "# normalized vols";
        if (zrows.empty()) out << " (skipped: transform not monotone)";
        out << "\nz,sigma1,sigma2,g1,g2\n";
        for (const auto& r : zrows)
            out << format_sig(r.z) << ',' << format_sig(r.sigma1) << ','
                << format_sig(r.sigma2) << ',' << format_sig(r.g1) << ','
                << format_sig(r.g2) << '\n';
        out << "# fixed points and certificates\n";
        out << "name,value\n";
        out << "z1_star," << (z1.z_star ? format_sig(*z1.z_star) : "") << '\n';
        out << "z2_star," << (z2.z_star ? format_sig(*z2.z_star) : "") << '\n';
        out << "f1_increasing," << (cert.f1_increasing ? "true" : "false") << '\n';
        out << "f2_increasing," << (cert.f2_increasing ? "true" : "false") << '\n';
        emit(opt, out.str());
    } else {
        json doc;
        doc["k_table"] = json::array();
        for (const auto& r : grid.rows)
            doc["k_table"].push_back({{"k", round_sig(r.k)},
                                      {"sigma", round_sig(r.sigma)},
                                      {"f1", round_sig(r.f1)},
                                      {"f2", round_sig(r.f2)}});
        doc["z_table"] = json::array();
        for (const auto& r : zrows)
            doc["z_table"].push_back({{"z", round_sig(r.z)},
                                      {"sigma1", round_sig(r.sigma1)},
                                      {"sigma2", round_sig(r.sigma2)},
                                      {"g1", round_sig(r.g1)},
                                      {"g2", round_sig(r.g2)}});
        doc["fixed_points"] = json::object();
        doc["fixed_points"]["z1_star"] =
            z1.z_star ? json(round_sig(*z1.z_star)) : json(nullptr);
        if (!z1.reason.empty()) doc["fixed_points"]["z1_star_reason"] = z1.reason;
        doc["fixed_points"]["z2_star"] =
            z2.z_star ? json(round_sig(*z2.z_star)) : json(nullptr);
        if (!z2.reason.empty()) doc["fixed_points"]["z2_star_reason"] = z2.reason;
        doc["monotone"] = {{"f1", cert.f1_increasing}, {"f2", cert.f2_increasing}};
        if (cert.f1_violation)
            doc["monotone"]["f1_violation"] = {round_sig(cert.f1_violation->first),
                                               round_sig(cert.f1_violation->second)};
        if (cert.f2_violation)
            doc["monotone"]["f2_violation"] = {round_sig(cert.f2_violation->first),
                                               round_sig(cert.f2_violation->second)};
        emit(opt, doc.dump(2) + "\n");
    }
    return 0;
}

json result_json(const volq::PricingResult& res) {
    json doc;
    doc["value"] = round_sig(res.value);
    doc["z_integral_part"] = round_sig(res.z_integral_part);
    doc["k_integral_part"] = round_sig(res.k_integral_part);
    doc["tail_contribution"] = round_sig(res.tail_contribution);
    doc["diagnostics"] = {{"z_nodes", res.diagnostics.z_nodes},
                          {"k_nodes", res.diagnostics.k_nodes},
                          {"f1_certified", res.diagnostics.f1_certified},
                          {"f2_certified", res.diagnostics.f2_certified}};
    return doc;
}

std::string result_csv(const volq::PricingResult& res) {
    std::ostringstream out;
    out << "name,value\n";
    out << "value," << format_sig(res.value) << '\n';
    out << "z_integral_part," << format_sig(res.z_integral_part) << '\n';
    out << "k_integral_part," << format_sig(res.k_integral_part) << '\n';
    out << "tail_contribution," << format_sig(res.tail_contribution) << '\n';
    out << "z_nodes," << res.diagnostics.z_nodes << '\n';
    out << "k_nodes," << res.diagnostics.k_nodes << '\n';
    return out.str();
}

int run_price(const Options& opt) {
    if (opt.swap_kind.empty() == opt.payoff_text.empty())
        throw volq::InvalidInput("price needs exactly one of --swap or --payoff");
    volq::Smile smile = load_smile(opt);
    volq::ZGridSpec zspec = parse_zgrid(opt.zgrid_text, volq::ZGridSpec{});

    volq::PricingResult res;
    std::string method;
    if (!opt.swap_kind.empty()) {
        if (opt.swap_kind == "variance")
            res = volq::variance_swap_strike(smile, zspec);
        else if (opt.swap_kind == "gamma")
            res = volq::gamma_swap_strike(smile, zspec);
        else
            throw volq::InvalidInput("--swap: expected variance or gamma");
    } else {
        volq::PayoffSpec payoff = parse_payoff(opt.payoff_text);
        volq::Measure measure = parse_measure(opt.measure);
        method = opt.method;
        if (method == "auto") method = payoff.d2psi ? "smooth" : "ac";
        if (method == "smooth") {
            volq::KGridSpec kspec{opt.kgrid_n};
            res = volq::price_smooth(smile, payoff, measure, zspec, kspec);
        } else if (method == "ac") {
            res = volq::price_ac(smile, payoff, measure, zspec);
        } else {
            throw volq::InvalidInput("--method: expected auto, smooth or ac");
        }
    }

    if (pick_format(opt, "json") == "csv") {
        std::ostringstream out;
        out << result_csv(res);
        if (!method.empty()) out << "method," << method << '\n';
        emit(opt, out.str());
    } else {
        json doc;
        if (!opt.swap_kind.empty())
            doc["swap"] = opt.swap_kind;
        else {
            doc["payoff"] = opt.payoff_text;
            doc["measure"] = opt.measure;
            doc["method"] = method;
        }
        doc.update(result_json(res));
        emit(opt, doc.dump(2) + "\n");
    }
    return 0;
}

int run_synth(const Options& opt) {
    if (pick_format(opt, "csv") == "json")
        throw volq::InvalidInput("synth emits quote CSV only; drop --format json");
    volq::oracle::MixtureModel model;
    if (!opt.fixture_path.empty()) {
        auto models = volq::oracle::load_mixtures(opt.fixture_path);
        bool found = false;
        for (auto& m : models)
            if (m.name == opt.model_name) {
                model = m;
                found = true;
            }
        if (!found)
            throw volq::InvalidInput("--model: no model named '" + opt.model_name +
                                     "' in '" + opt.fixture_path + "'");
    } else {
        model = volq::oracle::corpus_model(opt.model_name);
    }
    if (opt.synth_n < 3) throw volq::InvalidInput("--quotes: need at least 3");
    if (!(opt.synth_lo < opt.synth_hi))
        throw volq::InvalidInput("--k-lo must be below --k-hi");
    volq::Smile smile = volq::oracle::gen_smile(
        model, volq::linspace(opt.synth_lo, opt.synth_hi, opt.synth_n));
    std::ostringstream out;
    volq::write_quote_csv(out, smile);
    emit(opt, out.str());
    return 0;
}

int run_replicate(const Options& opt) {
    if (opt.payoff_text.empty()) throw volq::InvalidInput("replicate needs --payoff");
    if (opt.measure != "cash")
        throw volq::InvalidInput(
            "replicate compares against strike-space replication, which prices the "
            "cash measure only");
    volq::Smile smile = load_smile(opt);
    volq::PayoffSpec payoff = parse_payoff(opt.payoff_text);
    volq::ZGridSpec zspec = parse_zgrid(opt.zgrid_text, volq::ZGridSpec{});

    std::string method = opt.method;
    if (method == "auto") method = payoff.d2psi ? "smooth" : "ac";
    volq::PricingResult res;
    if (method == "smooth") {
        volq::KGridSpec kspec{opt.kgrid_n};
        res = volq::price_smooth(smile, payoff, volq::Measure::cash, zspec, kspec);
    } else if (method == "ac") {
        res = volq::price_ac(smile, payoff, volq::Measure::cash, zspec);
    } else {
        throw volq::InvalidInput("--method: expected auto, smooth or ac");
    }
    double repl = volq::oracle::replication_expectation(smile, payoff);
    double abs_gap = std::abs(res.value - repl);
    double rel_gap = abs_gap / std::max(std::abs(repl), 1e-9);

    if (pick_format(opt, "json") == "csv") {
        std::ostringstream out;
        out << "name,value\n";
        out << "z_space_value," << format_sig(res.value) << '\n';
        out << "method," << method << '\n';
        out << "replication_value," << format_sig(repl) << '\n';
        out << "abs_gap," << format_sig(abs_gap) << '\n';
        out << "rel_gap," << format_sig(rel_gap) << '\n';
        emit(opt, out.str());
    } else {
        json doc;
        doc["payoff"] = opt.payoff_text;
        doc["method"] = method;
        doc["z_space_value"] = round_sig(res.value);
        doc["replication_value"] = round_sig(repl);
        doc["abs_gap"] = round_sig(abs_gap);
        doc["rel_gap"] = round_sig(rel_gap);
        emit(opt, doc.dump(2) + "\n");
    }
    return 0;
}

void add_smile_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("input", opt.input, "Quote CSV path")->required();
    cmd->add_option("--forward", opt.forward, "Forward level (default 1)");
    cmd->add_option("--expiry-years", opt.expiry_years,
                    "Year fraction, required for --convention iv-annual");
    cmd->add_option("--convention", opt.convention,
                    "iv-annual | iv-total | put-price (default: CSV header)");
    cmd->add_option("--tail", opt.tail, "flat | lee (default flat)");
    cmd->add_option("--q-left", opt.q_left, "Left wing variance growth rate, in (0,2)")
        ->each([&opt](const std::string&) { opt.has_q_left = true; });
    cmd->add_option("--q-right", opt.q_right, "Right wing variance growth rate, in (0,2)")
        ->each([&opt](const std::string&) { opt.has_q_right = true; });
}

void add_output_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--format", opt.format, "csv | json");
    cmd->add_option("--output", opt.output, "Write to a file instead of stdout");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Implied-vol smile diagnostics and exact-quadrature pricing"};
    app.require_subcommand(1);

    Options opt;

    CLI::App* check = app.add_subcommand("check", "No-arbitrage diagnostics report");
    add_smile_flags(check, opt);
    add_output_flags(check, opt);
    check->add_option("--grid", opt.grid_n, "Scan grid size (default 101)");
    check->add_option("--k-star-left", opt.k_star_left,
                      "Anchor override for the sharpened slope bound, left wing")
        ->each([&opt](const std::string&) { opt.has_k_star_left = true; });
    check->add_option("--k-star-right", opt.k_star_right,
                      "Anchor override for the sharpened slope bound, right wing")
        ->each([&opt](const std::string&) { opt.has_k_star_right = true; });

    CLI::App* transform =
        app.add_subcommand("transform", "Transform grid, normalized vols, fixed points");
    add_smile_flags(transform, opt);
    add_output_flags(transform, opt);
    transform->add_option("--grid", opt.grid_n, "k-table size (default 101)");
    transform->add_option("--z-grid", opt.zgrid_text,
                          "z-table spec lo:hi:n (default -3:3:25)");

    CLI::App* price = app.add_subcommand("price", "Swap strikes and payoff prices");
    add_smile_flags(price, opt);
    add_output_flags(price, opt);
    price->add_option("--swap", opt.swap_kind, "variance | gamma");
    price->add_option("--payoff", opt.payoff_text,
                      "log | forward | spot-log | power:n | exp:a | table:path");
    price->add_option("--measure", opt.measure, "cash | share (default cash)");
    price->add_option("--method", opt.method,
                      "auto | smooth | ac (default auto: smooth when d2psi exists)");
    price->add_option("--z-grid", opt.zgrid_text, "z grid spec lo:hi:n (default -8:8:201)");
    price->add_option("--k-grid", opt.kgrid_n, "Simpson nodes for the k integral");

    CLI::App* synth = app.add_subcommand("synth", "Quote CSV from a fixture mixture model");
    synth->add_option("--model", opt.model_name, "Model name")->required();
    synth->add_option("--fixture", opt.fixture_path,
                      "JSON fixture list (default: built-in corpus)");
    synth->add_option("--k-lo", opt.synth_lo, "Lowest log-moneyness (default -2.5)");
    synth->add_option("--k-hi", opt.synth_hi, "Highest log-moneyness (default 2.5)");
    synth->add_option("--quotes", opt.synth_n, "Quote count (default 201)");
    add_output_flags(synth, opt);

    CLI::App* replicate =
        app.add_subcommand("replicate", "z-space price vs strike-space replication");
    add_smile_flags(replicate, opt);
    add_output_flags(replicate, opt);
    replicate->add_option("--payoff", opt.payoff_text,
                          "log | forward | spot-log | power:n | exp:a | table:path");
    replicate->add_option("--measure", opt.measure, "cash (replication target)");
    replicate->add_option("--method", opt.method, "auto | smooth | ac");
    replicate->add_option("--z-grid", opt.zgrid_text, "z grid spec lo:hi:n");
    replicate->add_option("--k-grid", opt.kgrid_n, "Simpson nodes for the k integral");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (app.got_subcommand(check)) return run_check(opt);
        if (app.got_subcommand(transform)) return run_transform(opt);
        if (app.got_subcommand(price)) return run_price(opt);
        if (app.got_subcommand(synth)) return run_synth(opt);
        if (app.got_subcommand(replicate)) return run_replicate(opt);
    } catch (const volq::NotMonotone& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 3;
    } catch (const volq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
