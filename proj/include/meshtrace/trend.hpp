#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "meshtrace/corpus.hpp"

namespace meshtrace::trend {

enum class TrendClass { EmergedSustained, EmergedNotSustained, EmergedFluctuated, NotYetEmerged };

std::string to_string(TrendClass c);

struct TrendParams {
    long threshold = 25;  // articles/year needed to count as emerged
    int dip_len = 2;      // consecutive sub-threshold years that end a run
};

struct PopularitySummary {
    long total = 0;
    double per_year = 0.0;
};

PopularitySummary summarize(const corpus::PopularitySeries& series);

// A term emerges when some year reaches the threshold. A dip of dip_len or
// more consecutive sub-threshold years afterwards ends the run; reaching the
// threshold again after such a dip makes the trend fluctuated. Single-year
// dips are ignored.
TrendClass classify_trend(const std::vector<long>& counts, const TrendParams& params);
TrendClass classify_trend(const corpus::PopularitySeries& series, const TrendParams& params);

struct QuartileLabel {
    int quartile = 0;  // 1..4, Q4 most popular
    bool emerging = false;
};

// Rank-based quartiles within one cohort: sort by total descending (ties by
// ascending ui), then hand out ceil(n/4) ranks per quartile from Q4 down.
std::map<std::string, QuartileLabel> cohort_quartiles(
    const std::vector<std::pair<std::string, long>>& cohort);

struct TrendDistribution {
    long sustained = 0;
    long not_sustained = 0;
    long fluctuated = 0;
    long not_yet = 0;

    long total() const { return sustained + not_sustained + fluctuated + not_yet; }
    long of(TrendClass c) const;
};

TrendDistribution trend_distribution(const std::vector<TrendClass>& labels);

}  // namespace meshtrace::trend
