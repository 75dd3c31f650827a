#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdet/time.hpp"

namespace cdet {

struct PricePoint {
    Date date;
    double close = 0.0;
};

/// Closing prices with strictly increasing dates and finite positive closes.
class PriceSeries {
public:
    PriceSeries(std::string symbol, std::vector<PricePoint> points);  // throws Error{InvalidConfig}

    /// CSV with header "date,close", ISO dates. Throws Error{Io | MalformedRecord | BadTimestamp}.
    static PriceSeries parse_csv(std::string_view text, std::string symbol);
    static PriceSeries load_csv(const std::filesystem::path& path, std::string symbol = {});

    const std::string& symbol() const { return symbol_; }
    const std::vector<PricePoint>& points() const { return points_; }

private:
    std::string symbol_;
    std::vector<PricePoint> points_;
};

struct DatedReturn {
    Date date;  // the later of the two closes
    double value = 0.0;
};

/// Simple returns (close_i - close_{i-1}) / close_{i-1}. Throws Error{InsufficientData}.
std::vector<DatedReturn> daily_returns(const PriceSeries& series);

struct ReturnStats {
    double mean = 0.0;
    double std = 0.0;  // sample estimator, n - 1 denominator
    std::size_t n = 0;
};

ReturnStats return_stats(std::span<const double> returns);  // throws Error{InsufficientData}

double event_day_zscore(double event_return, const ReturnStats& stats);  // throws Error{ZeroVariance}

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t count = 0;
};

/// Equal-width bins over [min, max]; every bin is right-open except the last.
std::vector<HistogramBin> return_histogram(std::span<const double> returns, std::size_t bins);

struct PairedReturn {
    Date date;
    double asset = 0.0;
    double index = 0.0;
};

/// Inner join of two return series on date.
std::vector<PairedReturn> pair_returns(std::span<const DatedReturn> asset, std::span<const DatedReturn> index);

struct EventImpact {
    Date event_date;
    double event_return = 0.0;
    std::vector<DatedReturn> window;  // returns strictly before the event date
    ReturnStats stats;
    double zscore = 0.0;
    std::vector<HistogramBin> histogram;
};

/// Scores the event-day return against up to `window_days` preceding returns.
/// Throws Error{InsufficientData} when the event date has no return or the window
/// holds fewer than two, Error{ZeroVariance} on a flat window.
EventImpact analyze_event(std::span<const DatedReturn> returns, Date event_date, std::size_t window_days,
                          std::size_t bins);

std::vector<double> values_of(std::span<const DatedReturn> returns);

} // namespace cdet
