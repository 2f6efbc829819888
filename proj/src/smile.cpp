#include "volq/smile.hpp"

#include "volq/errors.hpp"
#include "volq/format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

namespace volq {

namespace {

void validate_lee_side(double q, double k_end, double sigma_end, const char* side) {
    if (!(q > 0.0) || !(q < 2.0))
        throw InvalidInput(std::string("lee_wing ") + side + " tail: q must lie in (0, 2)");
    bool left = side[0] == 'l';
    if ((left && k_end > 0.0) || (!left && k_end < 0.0))
        throw InvalidInput(std::string("lee_wing ") + side +
                           " tail: quoted range must reach the wing's sign of k");
    if (sigma_end * sigma_end > q * std::abs(k_end))
        throw InvalidInput(std::string("lee_wing ") + side +
                           " tail: endpoint vol exceeds sqrt(q |k|); the tail would be "
                           "discontinuous");
}

} // namespace

Smile::Smile(ForwardContext ctx, std::vector<VolQuote> quotes, TailPolicy tails)
    : ctx_(std::move(ctx)), quotes_(std::move(quotes)), tails_(tails) {
    if (!(ctx_.forward > 0.0) || !std::isfinite(ctx_.forward))
        throw InvalidInput("smile: forward must be positive and finite");
    if (quotes_.size() < 3)
        throw InvalidInput("smile: at least 3 quotes are required");
    for (const auto& q : quotes_) {
        if (!std::isfinite(q.k)) throw InvalidInput("smile: non-finite log-moneyness");
        if (!(q.sigma > 0.0) || !std::isfinite(q.sigma))
            throw InvalidInput("smile: vols must be positive and finite");
    }
    std::sort(quotes_.begin(), quotes_.end(),
              [](const VolQuote& a, const VolQuote& b) { return a.k < b.k; });
    for (std::size_t i = 0; i + 1 < quotes_.size(); ++i) {
        double gap = quotes_[i + 1].k - quotes_[i].k;
        if (gap <= 1e-14 * std::max(1.0, std::abs(quotes_[i].k)))
            throw DuplicateStrike("smile: coincident quotes at k = " +
                                  format_sig(quotes_[i].k, 17));
    }
    if (tails_.kind == TailKind::lee_wing) {
        if (!tails_.q_left && !tails_.q_right)
            throw InvalidInput("lee_wing tails: at least one of q_left / q_right is needed");
        if (tails_.q_left)
            validate_lee_side(*tails_.q_left, k_min(), quotes_.front().sigma, "left");
        if (tails_.q_right)
            validate_lee_side(*tails_.q_right, k_max(), quotes_.back().sigma, "right");
    }

    // Natural cubic spline: second derivatives from the tridiagonal system,
    // zero at both ends, solved by the Thomas algorithm.
    std::size_t n = quotes_.size();
    m2_.assign(n, 0.0);
    std::size_t m = n - 2; // interior unknowns
    std::vector<double> diag(m), rhs(m), sup(m);
    for (std::size_t i = 0; i < m; ++i) {
        double h0 = quotes_[i + 1].k - quotes_[i].k;
        double h1 = quotes_[i + 2].k - quotes_[i + 1].k;
        double d0 = (quotes_[i + 1].sigma - quotes_[i].sigma) / h0;
        double d1 = (quotes_[i + 2].sigma - quotes_[i + 1].sigma) / h1;
        diag[i] = (h0 + h1) / 3.0;
        sup[i] = h1 / 6.0;
        rhs[i] = d1 - d0;
    }
    for (std::size_t i = 1; i < m; ++i) {
        double sub = (quotes_[i + 1].k - quotes_[i].k) / 6.0;
        double w = sub / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = m; i-- > 0;) {
        double acc = rhs[i];
        if (i + 1 < m) acc -= sup[i] * m2_[i + 2];
        m2_[i + 1] = acc / diag[i];
    }
}

double Smile::spline_at(double k) const {
    const auto& q = quotes_;
    std::size_t n = q.size();
    std::size_t i = 0;
    while (i + 2 < n && k >= q[i + 1].k) ++i;
    double h = q[i + 1].k - q[i].k;
    double a = (q[i + 1].k - k) / h;
    double b = (k - q[i].k) / h;
    return a * q[i].sigma + b * q[i + 1].sigma +
           ((a * a * a - a) * m2_[i] + (b * b * b - b) * m2_[i + 1]) * h * h / 6.0;
}

double Smile::spline_slope_at(double k) const {
    const auto& q = quotes_;
    std::size_t n = q.size();
    std::size_t i = 0;
    while (i + 2 < n && k >= q[i + 1].k) ++i;
    double h = q[i + 1].k - q[i].k;
    double a = (q[i + 1].k - k) / h;
    double b = (k - q[i].k) / h;
    return (q[i + 1].sigma - q[i].sigma) / h +
           ((1.0 - 3.0 * a * a) * m2_[i] + (3.0 * b * b - 1.0) * m2_[i + 1]) * h / 6.0;
}

double Smile::tail_sigma(double k, bool left) const {
    const VolQuote& end = left ? quotes_.front() : quotes_.back();
    const std::optional<double>& q = left ? tails_.q_left : tails_.q_right;
    if (tails_.kind == TailKind::flat || !q) return end.sigma;
    double dist = left ? end.k - k : k - end.k;
    double var = end.sigma * end.sigma + *q * dist;
    return std::sqrt(std::min(var, *q * std::abs(k)));
}

double Smile::raw_sigma_at(double k) const {
    if (!std::isfinite(k)) throw InvalidInput("sigma_at: k must be finite");
    if (k < k_min()) return tail_sigma(k, true);
    if (k > k_max()) return tail_sigma(k, false);
    return spline_at(k);
}

double Smile::sigma_at(double k) const { return std::max(raw_sigma_at(k), kSigmaFloor); }

double Smile::sigma_slope_at(double k) const {
    if (!std::isfinite(k)) throw InvalidInput("sigma_slope_at: k must be finite");
    if (k >= k_min() && k <= k_max()) return spline_slope_at(k);
    bool left = k < k_min();
    const std::optional<double>& q = left ? tails_.q_left : tails_.q_right;
    if (tails_.kind == TailKind::flat || !q) return 0.0;
    double s = sigma_at(k);
    return left ? -*q / (2.0 * s) : *q / (2.0 * s);
}

Smile ingest(const std::vector<RawQuote>& rows, const ForwardContext& ctx,
             QuoteConvention convention, AxisKind axis, double expiry_years,
             TailPolicy tails) {
    if (!(ctx.forward > 0.0) || !std::isfinite(ctx.forward))
        throw InvalidInput("ingest: forward must be positive and finite");
    if (convention == QuoteConvention::annualized_vol && !(expiry_years > 0.0))
        throw InvalidInput("ingest: annualized vols need a positive expiry in years");

    auto row_err = [](std::size_t line, const std::string& what) {
        std::ostringstream msg;
        msg << "row";
        if (line > 0) msg << " at line " << line;
        msg << ": " << what;
        return InvalidInput(msg.str());
    };

    std::vector<std::pair<VolQuote, std::size_t>> converted;
    converted.reserve(rows.size());
    for (const auto& row : rows) {
        if (!std::isfinite(row.axis) || !std::isfinite(row.value))
            throw row_err(row.line, "non-finite field");
        double k = row.axis;
        if (axis == AxisKind::strike) {
            if (!(row.axis > 0.0)) throw row_err(row.line, "non-positive strike");
            k = std::log(row.axis / ctx.forward);
        }
        double sigma = 0.0;
        switch (convention) {
        case QuoteConvention::total_vol:
            if (!(row.value > 0.0)) throw row_err(row.line, "non-positive vol");
            sigma = row.value;
            break;
        case QuoteConvention::annualized_vol:
            if (!(row.value > 0.0)) throw row_err(row.line, "non-positive vol");
            sigma = row.value * std::sqrt(expiry_years);
            break;
        case QuoteConvention::put_price:
            try {
                sigma = implied_vol(ctx, k, row.value);
            } catch (const NoVolSolution& e) {
                std::ostringstream msg;
                msg << "row";
                if (row.line > 0) msg << " at line " << row.line;
                msg << ": " << e.what();
                throw NoVolSolution(e.reason(), msg.str());
            }
            break;
        }
        converted.push_back({{k, sigma}, row.line});
    }

    std::stable_sort(converted.begin(), converted.end(),
                     [](const auto& a, const auto& b) { return a.first.k < b.first.k; });
    for (std::size_t i = 0; i + 1 < converted.size(); ++i) {
        double k0 = converted[i].first.k;
        double gap = converted[i + 1].first.k - k0;
        if (gap <= 1e-14 * std::max(1.0, std::abs(k0))) {
            std::ostringstream msg;
            msg << "duplicate quotes at k = " << format_sig(k0, 17);
            if (converted[i].second > 0)
                msg << " (lines " << converted[i].second << " and " << converted[i + 1].second
                    << ")";
            throw DuplicateStrike(msg.str());
        }
    }

    std::vector<VolQuote> quotes;
    quotes.reserve(converted.size());
    for (const auto& [quote, line] : converted) quotes.push_back(quote);
    return Smile(ctx, std::move(quotes), tails);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
    std::string s = cell;
    if (!s.empty() && s[0] == '+') s = s.substr(1);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw UnparseableRow(line_no, "line " + std::to_string(line_no) +
                                          ": cannot parse numeric cell '" + cell + "'");
    return out;
}

} // namespace

CsvQuotes read_quote_csv(std::istream& in) {
    CsvQuotes out;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t axis_col = 0, value_col = 0, need = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;

        if (!have_header) {
            auto cells = split_csv(line);
            bool axis_found = false, value_found = false;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                std::string name = lower(cells[i]);
                if (name == "k" || name == "log_moneyness") {
                    if (axis_found) throw InvalidInput("csv header: two axis columns");
                    out.axis = AxisKind::log_moneyness;
                    axis_col = i;
                    axis_found = true;
                } else if (name == "strike") {
                    if (axis_found) throw InvalidInput("csv header: two axis columns");
                    out.axis = AxisKind::strike;
                    axis_col = i;
                    axis_found = true;
                } else if (name == "total_vol") {
                    if (value_found) throw InvalidInput("csv header: two value columns");
                    out.convention = QuoteConvention::total_vol;
                    value_col = i;
                    value_found = true;
                } else if (name == "vol" || name == "iv" || name == "annualized_vol" ||
                           name == "implied_vol") {
                    if (value_found) throw InvalidInput("csv header: two value columns");
                    out.convention = QuoteConvention::annualized_vol;
                    value_col = i;
                    value_found = true;
                } else if (name == "put_price" || name == "put" || name == "price") {
                    if (value_found) throw InvalidInput("csv header: two value columns");
                    out.convention = QuoteConvention::put_price;
                    value_col = i;
                    value_found = true;
                }
            }
            if (!axis_found)
                throw InvalidInput("csv header: need an axis column named k, log_moneyness "
                                   "or strike");
            if (!value_found)
                throw InvalidInput("csv header: need a value column named total_vol, vol, "
                                   "annualized_vol, implied_vol, put_price, put or price");
            need = std::max(axis_col, value_col) + 1;
            have_header = true;
            continue;
        }

        auto cells = split_csv(line);
        if (cells.size() < need)
            throw UnparseableRow(line_no, "line " + std::to_string(line_no) +
                                              ": expected at least " + std::to_string(need) +
                                              " cells, got " + std::to_string(cells.size()));
        RawQuote row;
        row.axis = parse_cell(cells[axis_col], line_no);
        row.value = parse_cell(cells[value_col], line_no);
        row.line = line_no;
        out.rows.push_back(row);
    }
    if (!have_header) throw InvalidInput("csv: no header line found");
    return out;
}

void write_quote_csv(std::ostream& out, const Smile& smile, int digits) {
    out << "k,total_vol\n";
    for (const auto& q : smile.quotes())
        out << format_sig(q.k, digits) << ',' << format_sig(q.sigma, digits) << '\n';
}

} // namespace volq
