#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "meshtrace/corpus.hpp"
#include "meshtrace/vocab.hpp"

namespace meshtrace::profile {

enum class PathogenClass { PathogenHuman, PathogenOther, PathogenBoth, NonPathogen };

std::string to_string(PathogenClass c);

// Host keyword lists for pathogen classification. Markers match whole words
// (case-insensitive); hyphenated compounds like "non-human" do not trigger
// the bare "human" marker.
struct KeywordConfig {
    std::vector<std::string> human_markers{"human", "humans", "man"};
    std::vector<std::string> nonhuman_markers{"cattle",  "swine", "poultry",
                                              "fish",    "plants", "birds",
                                              "mice",    "simian", "primates (non-human)"};

    // Key-value file: human_markers=a,b,c and nonhuman_markers=x,y,z.
    static KeywordConfig load_kv_file(const std::string& path);
};

struct LagStage {
    int stage = 0;  // 1..5
    int lag_years = 0;
};

// Years from a term's inclusion to its first clinical-trial article. May be
// negative.
int clinical_lag(int added_year, int clinical_first_year);

// Stage brackets: 1 = [-4,0], 2 = [1,4], 3 = [5,8], 4 = [9,12], 5 = [13,17].
// Lags outside [-4,17] throw rather than clamp.
LagStage lag_stage(int lag);

// Only meaningful for Organisms (B) terms. The annotation marker
// "infection: coord" flags a pathogen; the scope note decides the host.
PathogenClass classify_pathogen(const vocab::TermRecord& term,
                                const KeywordConfig& keywords = {});

struct TopicProfile {
    std::string ui;
    int year_added = 0;
    std::set<char> categories;  // subject categories, V/Z dropped
    bool has_narrower = false;
    std::optional<int> clinical_first_year;
    bool clinical_significance = false;
    std::optional<PathogenClass> pathogen;  // present iff B in categories
};

TopicProfile build_profile(const vocab::TermRecord& term, const vocab::VocabularyDB& db,
                           const corpus::CorpusProvider& provider, int horizon_year,
                           const KeywordConfig& keywords = {});

}  // namespace meshtrace::profile
