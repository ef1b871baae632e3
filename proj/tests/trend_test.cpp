#include "doctest.h"

#include <algorithm>
#include <climits>
#include <cstdlib>
#include <vector>

#include "meshtrace/rng.hpp"
#include "meshtrace/trend.hpp"

using namespace meshtrace;
using trend::TrendClass;

namespace {

// Independent interpreter of the trend definition: scan for the first
// dip-length window of sub-threshold years after first emergence, then look
// for any later year back at the threshold.
TrendClass oracle_classify(const std::vector<long>& counts, long threshold, int dip_len) {
    const size_t n = counts.size();
    size_t emerged = n;
    for (size_t i = 0; i < n; ++i) {
        if (counts[i] >= threshold) {
            emerged = i;
            break;
        }
    }
    if (emerged == n)
        return TrendClass::NotYetEmerged;
    for (size_t s = emerged + 1; s + static_cast<size_t>(dip_len) <= n; ++s) {
        bool all_below = true;
        for (size_t j = s; j < s + static_cast<size_t>(dip_len); ++j) {
            if (counts[j] >= threshold) {
                all_below = false;
                break;
            }
        }
        if (!all_below)
            continue;
        for (size_t j = s; j < n; ++j)
            if (counts[j] >= threshold)
                return TrendClass::EmergedFluctuated;
        return TrendClass::EmergedNotSustained;
    }
    return TrendClass::EmergedSustained;
}

corpus::PopularitySeries make_series(int start_year, std::vector<long> counts) {
    corpus::PopularitySeries s;
    s.ui = "T";
    s.start_year = start_year;
    s.end_year = start_year + static_cast<int>(counts.size()) - 1;
    s.counts = std::move(counts);
    return s;
}

}  // namespace

TEST_CASE("classify_trend on the canonical shapes") {
    const trend::TrendParams params;
    CHECK(trend::classify_trend({30, 30, 30, 30}, params) == TrendClass::EmergedSustained);
    CHECK(trend::classify_trend({30, 30, 10, 10, 10}, params) ==
          TrendClass::EmergedNotSustained);
    CHECK(trend::classify_trend({30, 10, 30, 30}, params) == TrendClass::EmergedSustained);
    CHECK(trend::classify_trend({30, 10, 10, 30}, params) == TrendClass::EmergedFluctuated);
    CHECK(trend::classify_trend({5, 5, 5}, params) == TrendClass::NotYetEmerged);
    CHECK_THROWS_AS(trend::classify_trend(std::vector<long>{}, params),
                    std::invalid_argument);
}

TEST_CASE("a dip running to the end of the series counts as not sustained") {
    const trend::TrendParams params;
    CHECK(trend::classify_trend({30, 10, 10}, params) == TrendClass::EmergedNotSustained);
    // Fluctuation is sticky even when the series ends in another dip.
    CHECK(trend::classify_trend({30, 10, 10, 30, 10, 10}, params) ==
          TrendClass::EmergedFluctuated);
}

TEST_CASE("classify_trend agrees with the brute-force interpreter") {
    Rng rng(424242);
    for (int trial = 0; trial < 2000; ++trial) {
        const size_t len = 1 + rng.below(20);
        std::vector<long> counts(len);
        for (auto& c : counts)
            c = static_cast<long>(rng.below(61));
        const trend::TrendParams params{static_cast<long>(1 + rng.below(40)),
                                        static_cast<int>(1 + rng.below(4))};
        CHECK(trend::classify_trend(counts, params) ==
              oracle_classify(counts, params.threshold, params.dip_len));
    }
}

TEST_CASE("raising the threshold never un-emerges a term into an emerged class") {
    Rng rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        const size_t len = 1 + rng.below(15);
        std::vector<long> counts(len);
        for (auto& c : counts)
            c = static_cast<long>(rng.below(61));
        const long t1 = static_cast<long>(1 + rng.below(30));
        const long t2 = t1 + static_cast<long>(1 + rng.below(30));
        const auto c1 = trend::classify_trend(counts, {t1, 2});
        const auto c2 = trend::classify_trend(counts, {t2, 2});
        if (c1 == TrendClass::NotYetEmerged)
            CHECK(c2 == TrendClass::NotYetEmerged);
    }
}

TEST_CASE("permuting pre-emergence years cannot change emergence existence") {
    Rng rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        const size_t len = 2 + rng.below(12);
        std::vector<long> counts(len);
        for (auto& c : counts)
            c = static_cast<long>(rng.below(61));
        const trend::TrendParams params{25, 2};
        size_t first = len;
        for (size_t i = 0; i < len; ++i)
            if (counts[i] >= params.threshold) {
                first = i;
                break;
            }
        if (first == len || first == 0)
            continue;
        std::vector<long> prefix(counts.begin(), counts.begin() + static_cast<long>(first));
        rng.shuffle(prefix);
        std::vector<long> permuted = prefix;
        permuted.insert(permuted.end(), counts.begin() + static_cast<long>(first),
                        counts.end());
        const bool was = trend::classify_trend(counts, params) != TrendClass::NotYetEmerged;
        const bool is = trend::classify_trend(permuted, params) != TrendClass::NotYetEmerged;
        CHECK(was == is);
    }
}

TEST_CASE("summarize totals and per-year rates") {
    const auto zero = trend::summarize(make_series(2005, {0, 0, 0}));
    CHECK(zero.total == 0);
    CHECK(zero.per_year == doctest::Approx(0.0));

    const auto s = trend::summarize(make_series(2005, {10, 20, 30}));
    CHECK(s.total == 60);
    CHECK(s.per_year == doctest::Approx(20.0));

    // 19 inclusive years from 2001 to 2019.
    std::vector<long> counts(19, 575);
    counts[0] = 576;  // total 10926
    const auto big = trend::summarize(make_series(2001, counts));
    CHECK(big.total == 10926);
    CHECK(big.per_year == doctest::Approx(575.05).epsilon(1e-4));
}

TEST_CASE("cohort quartiles hand out ceil(n/4) ranks from the top") {
    std::vector<std::pair<std::string, long>> cohort{
        {"a", 100}, {"b", 80}, {"c", 60}, {"d", 40},
        {"e", 30},  {"f", 20}, {"g", 10}, {"h", 5}};
    const auto labels = trend::cohort_quartiles(cohort);
    CHECK(labels.at("a").quartile == 4);
    CHECK(labels.at("b").quartile == 4);
    CHECK(labels.at("c").quartile == 3);
    CHECK(labels.at("d").quartile == 3);
    CHECK(labels.at("e").quartile == 2);
    CHECK(labels.at("f").quartile == 2);
    CHECK(labels.at("g").quartile == 1);
    CHECK(labels.at("h").quartile == 1);
    CHECK(labels.at("a").emerging);
    CHECK(!labels.at("c").emerging);
}

TEST_CASE("cohort quartiles degenerate cohorts") {
    const auto single = trend::cohort_quartiles({{"only", 7}});
    CHECK(single.at("only").quartile == 4);
    CHECK(single.at("only").emerging);

    CHECK_THROWS_AS(trend::cohort_quartiles({}), std::invalid_argument);
    CHECK_THROWS_AS(trend::cohort_quartiles({{"x", 1}, {"x", 2}}), std::invalid_argument);
}

TEST_CASE("equal totals break ties by ascending ui") {
    std::vector<std::pair<std::string, long>> cohort;
    for (char c = 'a'; c < 'a' + 6; ++c)
        cohort.emplace_back(std::string(1, c), 50);
    const auto labels = trend::cohort_quartiles(cohort);
    // ceil(6/4) = 2 top ranks land in Q4; successive ceil spreads the rest.
    CHECK(labels.at("a").quartile == 4);
    CHECK(labels.at("b").quartile == 4);
    CHECK(labels.at("c").quartile == 3);
    CHECK(labels.at("d").quartile == 3);
    CHECK(labels.at("e").quartile == 2);
    CHECK(labels.at("f").quartile == 1);
}

TEST_CASE("quartile structure on random cohorts") {
    Rng rng(31337);
    for (int trial = 0; trial < 200; ++trial) {
        const size_t n = 1 + rng.below(40);
        std::vector<std::pair<std::string, long>> cohort;
        for (size_t i = 0; i < n; ++i)
            cohort.emplace_back("t" + std::to_string(100 + i),
                                static_cast<long>(rng.below(500)));
        const auto labels = trend::cohort_quartiles(cohort);

        long sizes[5] = {0, 0, 0, 0, 0};
        long q4_min = LONG_MAX, rest_max = LONG_MIN;
        for (const auto& [ui, total] : cohort) {
            const auto& l = labels.at(ui);
            ++sizes[l.quartile];
            CHECK(l.emerging == (l.quartile == 4));
            if (l.quartile == 4)
                q4_min = std::min(q4_min, total);
            else
                rest_max = std::max(rest_max, total);
        }
        for (int q = 1; q < 4; ++q)
            CHECK(std::abs(sizes[q + 1] - sizes[q]) <= 1);
        CHECK(sizes[4] == static_cast<long>((n + 3) / 4));
        if (sizes[4] < static_cast<long>(n))
            CHECK(q4_min >= rest_max);

        // Adding a constant shifts no one across quartiles.
        auto shifted = cohort;
        for (auto& [ui, total] : shifted)
            total += 1000;
        const auto shifted_labels = trend::cohort_quartiles(shifted);
        for (const auto& [ui, total] : cohort)
            CHECK(shifted_labels.at(ui).quartile == labels.at(ui).quartile);
    }
}

TEST_CASE("trend distribution counts per class") {
    CHECK(trend::trend_distribution({}).total() == 0);

    const auto d = trend::trend_distribution({TrendClass::EmergedSustained,
                                              TrendClass::EmergedSustained,
                                              TrendClass::NotYetEmerged});
    CHECK(d.sustained == 2);
    CHECK(d.not_yet == 1);
    CHECK(d.not_sustained == 0);
    CHECK(d.fluctuated == 0);
    CHECK(d.total() == 3);
}

TEST_CASE("trend distribution recovers planted patterns") {
    const trend::TrendParams params;
    std::vector<TrendClass> labels;
    const std::vector<std::vector<long>> planted{
        {30, 30, 30},      // sustained
        {30, 10, 10},      // not sustained
        {30, 10, 10, 30},  // fluctuated
        {1, 2, 3},         // not yet
        {40, 40, 5, 40},   // sustained (single-year dip)
    };
    for (const auto& counts : planted)
        labels.push_back(trend::classify_trend(counts, params));
    const auto d = trend::trend_distribution(labels);
    CHECK(d.sustained == 2);
    CHECK(d.not_sustained == 1);
    CHECK(d.fluctuated == 1);
    CHECK(d.not_yet == 1);
}
