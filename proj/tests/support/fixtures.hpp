#pragma once

// Shared fixture machinery: a seeded generator planting known emergence
// structure, plus an esearch-style query evaluator backing the mocked live
// transports.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "meshtrace/corpus.hpp"
#include "meshtrace/live_client.hpp"

namespace meshtrace::testing {

struct PlantedFixture {
    std::string vocab_jsonl;
    std::string new_terms_json;
    std::string corpus_jsonl;

    std::vector<int> cohort_years;
    int horizon_year = 0;
    // Ground truth for the selected terms.
    std::map<std::string, bool> clinical_flag;
    std::map<std::string, bool> planted_emerger;
    std::map<std::string, int> clinical_lag_years;
    std::vector<std::string> selected_uis;
};

// Emergence is planted so P(emerge | clinical) = 4 * P(emerge | not
// clinical): each cohort's top quartile is drawn with weight 4 for
// clinical-flagged terms. Clinical evidence lands 5 years after inclusion
// except for every tenth clinical term, which gets it in the inclusion year
// so early-forecast designs stay full rank. Each cohort also carries one
// candidate per exclusion rule plus a boundary term first indexed exactly
// five years before inclusion (kept).
PlantedFixture make_planted_fixture(std::uint64_t seed, int terms_per_cohort = 70,
                                    std::vector<int> cohort_years = {2002, 2003, 2004},
                                    int horizon_year = 2019);

struct FixturePaths {
    std::string vocab;
    std::string new_terms;
    std::string corpus;
};

FixturePaths write_fixture(const PlantedFixture& fixture, const std::string& dir);

// Evaluates an esearch query string against raw articles. Supported term
// grammar: "<label>"[MAJR:noexp] and "<label>"[MeSH Terms], optionally
// AND-combined with clinical trial[pt] and a Y[dp] or Y1:Y2[dp] clause.
long eval_esearch_query(const std::string& query, const std::vector<corpus::Article>& articles,
                        const std::map<std::string, std::string>& label_to_ui);

// In-process transport answering from the given articles, E-utilities JSON
// shape (count serialized as a string).
corpus::Transport make_mock_esearch_transport(
    std::shared_ptr<const std::vector<corpus::Article>> articles,
    std::shared_ptr<const std::map<std::string, std::string>> label_to_ui);

}  // namespace meshtrace::testing
