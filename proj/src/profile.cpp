#include "meshtrace/profile.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "meshtrace/io_util.hpp"

namespace meshtrace::profile {

std::string to_string(PathogenClass c) {
    switch (c) {
        case PathogenClass::PathogenHuman: return "PathogenHuman";
        case PathogenClass::PathogenOther: return "PathogenOther";
        case PathogenClass::PathogenBoth: return "PathogenBoth";
        case PathogenClass::NonPathogen: return "NonPathogen";
    }
    return "?";
}

KeywordConfig KeywordConfig::load_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open keyword config: " + path);
    KeywordConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("keyword config " + path + ": expected key=value, got: " +
                                     line);
        std::string key = line.substr(0, eq);
        std::vector<std::string> values;
        std::istringstream rest(line.substr(eq + 1));
        std::string item;
        while (std::getline(rest, item, ',')) {
            size_t b = item.find_first_not_of(" \t");
            size_t e = item.find_last_not_of(" \t\r");
            if (b != std::string::npos)
                values.push_back(item.substr(b, e - b + 1));
        }
        if (key == "human_markers")
            cfg.human_markers = values;
        else if (key == "nonhuman_markers")
            cfg.nonhuman_markers = values;
        else
            throw std::runtime_error("keyword config " + path + ": unknown key " + key);
    }
    return cfg;
}

int clinical_lag(int added_year, int clinical_first_year) {
    return clinical_first_year - added_year;
}

LagStage lag_stage(int lag) {
    LagStage s;
    s.lag_years = lag;
    if (lag >= -4 && lag <= 0)
        s.stage = 1;
    else if (lag <= 4)
        s.stage = 2;
    else if (lag <= 8)
        s.stage = 3;
    else if (lag <= 12)
        s.stage = 4;
    else if (lag <= 17)
        s.stage = 5;
    else
        s.stage = 0;
    if (s.stage == 0 || lag < -4)
        throw std::out_of_range("clinical-significance lag " + std::to_string(lag) +
                                " outside the staged range [-4, 17]");
    return s;
}

namespace {

// Word characters for marker matching; the hyphen is included so "non-human"
// does not contain the word "human".
bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-';
}

bool contains_word(const std::string& text_lower, const std::string& marker_lower) {
    if (marker_lower.empty())
        return false;
    size_t pos = 0;
    while ((pos = text_lower.find(marker_lower, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(text_lower[pos - 1]);
        const size_t end = pos + marker_lower.size();
        const bool right_ok = end >= text_lower.size() || !is_word_char(text_lower[end]);
        if (left_ok && right_ok)
            return true;
        ++pos;
    }
    return false;
}

bool matches_any(const std::string& text_lower, const std::vector<std::string>& markers) {
    for (const auto& marker : markers)
        if (contains_word(text_lower, io::to_lower(marker)))
            return true;
    return false;
}

constexpr const char* kInfectionMarker = "infection: coord";

}  // namespace

PathogenClass classify_pathogen(const vocab::TermRecord& term, const KeywordConfig& keywords) {
    if (!vocab::broad_categories(term).count('B'))
        throw std::invalid_argument("classify_pathogen: " + term.ui + " is not an Organisms term");

    const std::string annotation = io::to_lower(term.annotation);
    if (annotation.find(kInfectionMarker) == std::string::npos)
        return PathogenClass::NonPathogen;

    const std::string scope = io::to_lower(term.scope_note);
    const bool human = matches_any(scope, keywords.human_markers);
    const bool nonhuman = matches_any(scope, keywords.nonhuman_markers);
    if (human && nonhuman)
        return PathogenClass::PathogenBoth;
    if (human)
        return PathogenClass::PathogenHuman;
    return PathogenClass::PathogenOther;
}

TopicProfile build_profile(const vocab::TermRecord& term, const vocab::VocabularyDB& db,
                           const corpus::CorpusProvider& provider, int horizon_year,
                           const KeywordConfig& keywords) {
    TopicProfile p;
    p.ui = term.ui;
    p.year_added = term.year_added;
    p.categories = vocab::subject_categories(term);
    p.has_narrower = vocab::has_narrower_at_inclusion(db, term);

    std::optional<int> clinical = provider.first_clinical_trial_year(term.ui);
    if (clinical && *clinical <= horizon_year)
        p.clinical_first_year = clinical;
    p.clinical_significance = p.clinical_first_year.has_value();

    if (p.categories.count('B'))
        p.pathogen = classify_pathogen(term, keywords);
    return p;
}

}  // namespace meshtrace::profile
