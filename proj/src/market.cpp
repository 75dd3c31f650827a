#include "cdet/market.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cdet/detail/strings.hpp"
#include "cdet/error.hpp"

namespace cdet {

PriceSeries::PriceSeries(std::string symbol, std::vector<PricePoint> points)
    : symbol_(std::move(symbol)), points_(std::move(points)) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if (!std::isfinite(p.close) || p.close <= 0.0)
            throw Error(Errc::InvalidConfig, fmt::format("close on {} must be positive", format_date(p.date)));
        if (i > 0 && !(points_[i - 1].date < p.date))
            throw Error(Errc::InvalidConfig, fmt::format("dates not strictly increasing at {}", format_date(p.date)));
    }
}

PriceSeries PriceSeries::parse_csv(std::string_view text, std::string symbol) {
    auto lines = detail::split_lines(text);
    std::vector<PricePoint> points;
    bool header_seen = false;
    std::size_t line_no = 0;
    for (auto raw : lines) {
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string_view::npos)
            throw Error(Errc::MalformedRecord, fmt::format("price CSV line {}: expected date,close", line_no));
        auto first = detail::trim(line.substr(0, comma));
        auto second = detail::trim(line.substr(comma + 1));
        if (!header_seen) {
            if (detail::to_lower(first) != "date" || detail::to_lower(second) != "close")
                throw Error(Errc::MalformedRecord, "price CSV must start with header 'date,close'");
            header_seen = true;
            continue;
        }
        double close = 0.0;
        try {
            std::size_t used = 0;
            std::string s(second);
            close = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw Error(Errc::MalformedRecord, fmt::format("price CSV line {}: bad close '{}'", line_no, second));
        }
        points.push_back(PricePoint{parse_date(first), close});
    }
    if (!header_seen) throw Error(Errc::MalformedRecord, "price CSV is empty");
    try {
        return PriceSeries(std::move(symbol), std::move(points));
    } catch (const Error& e) {
        throw Error(Errc::MalformedRecord, e.what());
    }
}

PriceSeries PriceSeries::load_csv(const std::filesystem::path& path, std::string symbol) {
    if (symbol.empty()) symbol = path.stem().string();
    return parse_csv(detail::read_file(path), std::move(symbol));
}

std::vector<DatedReturn> daily_returns(const PriceSeries& series) {
    const auto& pts = series.points();
    if (pts.size() < 2)
        throw Error(Errc::InsufficientData, fmt::format("{} needs at least 2 closes, has {}", series.symbol(), pts.size()));
    std::vector<DatedReturn> out;
    out.reserve(pts.size() - 1);
    for (std::size_t i = 1; i < pts.size(); ++i)
        out.push_back(DatedReturn{pts[i].date, (pts[i].close - pts[i - 1].close) / pts[i - 1].close});
    return out;
}

ReturnStats return_stats(std::span<const double> returns) {
    if (returns.size() < 2)
        throw Error(Errc::InsufficientData, fmt::format("need at least 2 returns, have {}", returns.size()));
    // Welford's running update.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double r : returns) {
        ++n;
        double delta = r - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (r - mean);
    }
    return ReturnStats{mean, std::sqrt(m2 / static_cast<double>(n - 1)), n};
}

double event_day_zscore(double event_return, const ReturnStats& stats) {
    if (!(stats.std > 0.0)) throw Error(Errc::ZeroVariance, "standard deviation is zero");
    return (event_return - stats.mean) / stats.std;
}

std::vector<HistogramBin> return_histogram(std::span<const double> returns, std::size_t bins) {
    if (returns.empty()) throw Error(Errc::InsufficientData, "histogram needs at least one return");
    if (bins == 0) throw Error(Errc::InsufficientData, "histogram needs at least one bin");
    auto [min_it, max_it] = std::minmax_element(returns.begin(), returns.end());
    double lo = *min_it;
    double hi = *max_it;
    double width = (hi - lo) / static_cast<double>(bins);

    std::vector<HistogramBin> out(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        out[i].low = lo + width * static_cast<double>(i);
        out[i].high = i + 1 == bins ? hi : lo + width * static_cast<double>(i + 1);
    }
    for (double r : returns) {
        std::size_t index = bins - 1;
        if (width > 0.0) {
            index = std::min(bins - 1, static_cast<std::size_t>(std::floor((r - lo) / width)));
            // Settle rounding at the edges against the stored bounds.
            while (index > 0 && r < out[index].low) --index;
            while (index + 1 < bins && r >= out[index].high) ++index;
        }
        ++out[index].count;
    }
    return out;
}

std::vector<PairedReturn> pair_returns(std::span<const DatedReturn> asset, std::span<const DatedReturn> index) {
    std::vector<PairedReturn> out;
    auto a = asset.begin();
    auto b = index.begin();
    while (a != asset.end() && b != index.end()) {
        if (a->date < b->date) {
            ++a;
        } else if (b->date < a->date) {
            ++b;
        } else {
            out.push_back(PairedReturn{a->date, a->value, b->value});
            ++a;
            ++b;
        }
    }
    return out;
}

std::vector<double> values_of(std::span<const DatedReturn> returns) {
    std::vector<double> out;
    out.reserve(returns.size());
    for (const auto& r : returns) out.push_back(r.value);
    return out;
}

EventImpact analyze_event(std::span<const DatedReturn> returns, Date event_date, std::size_t window_days,
                          std::size_t bins) {
    auto it = std::find_if(returns.begin(), returns.end(), [&](const DatedReturn& r) { return r.date == event_date; });
    if (it == returns.end())
        throw Error(Errc::InsufficientData, fmt::format("no return dated {}", format_date(event_date)));

    EventImpact impact;
    impact.event_date = event_date;
    impact.event_return = it->value;
    auto available = static_cast<std::size_t>(it - returns.begin());
    auto take = std::min(available, window_days);
    impact.window.assign(it - static_cast<std::ptrdiff_t>(take), it);
    auto values = values_of(impact.window);
    impact.stats = return_stats(values);
    impact.zscore = event_day_zscore(impact.event_return, impact.stats);
    impact.histogram = return_histogram(values, bins);
    return impact;
}

} // namespace cdet
