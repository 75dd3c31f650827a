#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdet/market.hpp"
#include "cdet/pipeline.hpp"
#include "cdet/synth.hpp"

namespace cdet {

inline constexpr int kReportSchemaVersion = 1;

std::string render_detection(const DetectionResult& result, const RunConfig& config, ReportFormat format);

/// Reads the "events" array back from a JSON detection report. Throws Error{MalformedRecord}.
std::vector<ControversyReport> parse_detection_report(std::string_view text);

struct SeriesAnalysis {
    std::string symbol;
    std::vector<DatedReturn> returns;
    ReturnStats stats;                     // over the event window, or every return
    std::vector<HistogramBin> histogram;   // same sample as stats
    std::optional<Date> event_date;
    std::optional<double> event_return;
    std::optional<double> zscore;
};

struct MarketAnalysis {
    SeriesAnalysis asset;
    std::optional<SeriesAnalysis> index;
    std::vector<PairedReturn> paired;
    std::size_t window_days = 0;
};

/// Throws Error{InsufficientData | ZeroVariance}.
SeriesAnalysis analyze_series(const PriceSeries& series, std::optional<Date> event_date, std::size_t window_days,
                              std::size_t bins);

std::string render_market(const MarketAnalysis& analysis, ReportFormat format);

std::string render_evaluation(const EvaluationResult& result, ReportFormat format);

} // namespace cdet
