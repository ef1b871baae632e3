#include "meshtrace/trend.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace meshtrace::trend {

std::string to_string(TrendClass c) {
    switch (c) {
        case TrendClass::EmergedSustained: return "EmergedSustained";
        case TrendClass::EmergedNotSustained: return "EmergedNotSustained";
        case TrendClass::EmergedFluctuated: return "EmergedFluctuated";
        case TrendClass::NotYetEmerged: return "NotYetEmerged";
    }
    return "?";
}

PopularitySummary summarize(const corpus::PopularitySeries& series) {
    PopularitySummary s;
    s.total = series.total();
    s.per_year = static_cast<double>(s.total) / series.num_years();
    return s;
}

TrendClass classify_trend(const std::vector<long>& counts, const TrendParams& params) {
    if (counts.empty())
        throw std::invalid_argument("classify_trend: empty series");
    if (params.threshold < 1 || params.dip_len < 1)
        throw std::invalid_argument("classify_trend: invalid params");

    const size_t n = counts.size();
    size_t emerged = n;
    for (size_t i = 0; i < n; ++i) {
        if (counts[i] >= params.threshold) {
            emerged = i;
            break;
        }
    }
    if (emerged == n)
        return TrendClass::NotYetEmerged;

    // Walk the maximal sub-threshold runs after first emergence. The first
    // run of dip_len or more decides the class: if the series continues past
    // it, that next year is back at the threshold, so the topic re-emerged.
    size_t i = emerged + 1;
    while (i < n) {
        if (counts[i] >= params.threshold) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < n && counts[j] < params.threshold)
            ++j;
        if (j - i >= static_cast<size_t>(params.dip_len))
            return j < n ? TrendClass::EmergedFluctuated : TrendClass::EmergedNotSustained;
        i = j;
    }
    return TrendClass::EmergedSustained;
}

TrendClass classify_trend(const corpus::PopularitySeries& series, const TrendParams& params) {
    return classify_trend(series.counts, params);
}

std::map<std::string, QuartileLabel> cohort_quartiles(
    const std::vector<std::pair<std::string, long>>& cohort) {
    if (cohort.empty())
        throw std::invalid_argument("cohort_quartiles: empty cohort");
    {
        std::set<std::string> uis;
        for (const auto& [ui, total] : cohort)
            if (!uis.insert(ui).second)
                throw std::invalid_argument("cohort_quartiles: duplicate ui " + ui);
    }

    std::vector<std::pair<std::string, long>> ranked = cohort;
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return a.first < b.first;
    });

    // Successive ceil split from the top: Q4 takes ceil(n/4) ranks, Q3
    // ceil of the remainder over 3, and so on. Sizes never differ by more
    // than one between adjacent quartiles.
    const size_t n = ranked.size();
    size_t remaining = n;
    size_t rank = 0;
    std::map<std::string, QuartileLabel> labels;
    for (int quartile = 4; quartile >= 1; --quartile) {
        const size_t take = (remaining + static_cast<size_t>(quartile) - 1) /
                            static_cast<size_t>(quartile);
        for (size_t i = 0; i < take; ++i, ++rank) {
            QuartileLabel label;
            label.quartile = quartile;
            label.emerging = quartile == 4;
            labels.emplace(ranked[rank].first, label);
        }
        remaining -= take;
    }
    return labels;
}

long TrendDistribution::of(TrendClass c) const {
    switch (c) {
        case TrendClass::EmergedSustained: return sustained;
        case TrendClass::EmergedNotSustained: return not_sustained;
        case TrendClass::EmergedFluctuated: return fluctuated;
        case TrendClass::NotYetEmerged: return not_yet;
    }
    return 0;
}

TrendDistribution trend_distribution(const std::vector<TrendClass>& labels) {
    TrendDistribution d;
    for (TrendClass c : labels) {
        switch (c) {
            case TrendClass::EmergedSustained: ++d.sustained; break;
            case TrendClass::EmergedNotSustained: ++d.not_sustained; break;
            case TrendClass::EmergedFluctuated: ++d.fluctuated; break;
            case TrendClass::NotYetEmerged: ++d.not_yet; break;
        }
    }
    return d;
}

}  // namespace meshtrace::trend
