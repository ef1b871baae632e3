#include "support/fixtures.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

#include "meshtrace/io_util.hpp"
#include "meshtrace/rng.hpp"

namespace meshtrace::testing {

using nlohmann::json;

namespace {

json term_json(const std::string& ui, const std::string& label, int year,
               const std::vector<std::string>& trees) {
    return json{{"ui", ui},
                {"label", label},
                {"year_added", year},
                {"tree_numbers", trees},
                {"annotation", ""},
                {"scope_note", ""},
                {"previously_indexing", json::array()},
                {"deleted", false}};
}

char draw_category(Rng& rng) {
    const double r = rng.uniform01();
    if (r < 0.45)
        return 'D';
    if (r < 0.65)
        return 'B';
    if (r < 0.75)
        return 'C';
    if (r < 0.90)
        return 'E';
    return 'G';
}

std::vector<size_t> weighted_sample_without_replacement(Rng& rng, std::vector<double> weights,
                                                        size_t k) {
    std::vector<size_t> alive(weights.size());
    for (size_t i = 0; i < alive.size(); ++i)
        alive[i] = i;
    std::vector<size_t> chosen;
    while (chosen.size() < k && !alive.empty()) {
        double total = 0;
        for (size_t i : alive)
            total += weights[i];
        double r = rng.uniform01() * total;
        size_t pick = alive.size() - 1;
        for (size_t j = 0; j < alive.size(); ++j) {
            r -= weights[alive[j]];
            if (r <= 0) {
                pick = j;
                break;
            }
        }
        chosen.push_back(alive[pick]);
        alive.erase(alive.begin() + static_cast<long>(pick));
    }
    return chosen;
}

}  // namespace

PlantedFixture make_planted_fixture(std::uint64_t seed, int terms_per_cohort,
                                    std::vector<int> cohort_years, int horizon_year) {
    Rng rng(seed);
    PlantedFixture fx;
    fx.cohort_years = cohort_years;
    fx.horizon_year = horizon_year;

    std::vector<json> vocab_lines;
    std::vector<json> article_lines;
    json new_terms = json::object();
    int term_counter = 0;
    long pmid_counter = 0;
    int tree_counter = 100;

    auto next_ui = [&] {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "T%06d", ++term_counter);
        return std::string(buf);
    };
    auto next_pmid = [&] {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "P%07ld", ++pmid_counter);
        return std::string(buf);
    };
    auto add_article = [&](int year, const std::string& ui, bool major,
                           bool clinical_trial) {
        json pub_types = json::array({"Journal Article"});
        if (clinical_trial)
            pub_types.push_back("Clinical Trial");
        article_lines.push_back(json{{"pmid", next_pmid()},
                                     {"year", year},
                                     {"pub_types", pub_types},
                                     {"headings", json::array({json{{"ui", ui},
                                                                    {"major", major}}})}});
    };

    for (int year : cohort_years) {
        std::vector<std::string> cohort_list;
        std::vector<std::string> selected;
        std::vector<bool> clinical;

        for (int i = 0; i < terms_per_cohort; ++i) {
            const std::string ui = next_ui();
            const std::string label = "Concept " + std::to_string(term_counter);
            const char main_cat = draw_category(rng);
            std::vector<std::string> trees{std::string(1, main_cat) + "01.200." +
                                           std::to_string(++tree_counter)};
            if (rng.uniform01() < 0.15) {
                char second = draw_category(rng);
                while (second == main_cat)
                    second = draw_category(rng);
                trees.push_back(std::string(1, second) + "01.200." +
                                std::to_string(++tree_counter));
            }
            json term = term_json(ui, label, year, trees);
            if (main_cat == 'B' && rng.uniform01() < 0.4) {
                term["annotation"] = "infection: coord IM with SOME INFECTIONS";
                const double host = rng.uniform01();
                term["scope_note"] = host < 0.4   ? "causes disease in humans"
                                     : host < 0.8 ? "affects cattle and swine"
                                                  : "affects humans and poultry";
            }
            vocab_lines.push_back(term);
            cohort_list.push_back(ui);
            selected.push_back(ui);
            clinical.push_back(rng.uniform01() < 0.5);

            if (rng.uniform01() < 0.25) {
                // Child record present at inclusion; not a cohort candidate.
                const std::string child_ui = next_ui();
                vocab_lines.push_back(term_json(child_ui,
                                                "Concept " + std::to_string(term_counter) +
                                                    " (narrower)",
                                                year, {trees[0] + ".001"}));
            }
            if (i == 0) {
                // Boundary of the five-year rule: first article exactly five
                // years before inclusion stays selected.
                add_article(year - 5, ui, true, false);
            }
        }

        // Exclusion-rule candidates, one per rule.
        {
            const std::string ui = next_ui();
            json t = term_json(ui, "Concept " + std::to_string(term_counter) + " (deleted)",
                               year, {"D01.200." + std::to_string(++tree_counter)});
            t["deleted"] = true;
            t["deleted_year"] = year + 2;
            vocab_lines.push_back(t);
            cohort_list.push_back(ui);
        }
        {
            const std::string ui = next_ui();
            json t = term_json(ui, "Concept " + std::to_string(term_counter) + " (renamed)",
                               year, {"D01.200." + std::to_string(++tree_counter)});
            t["previously_indexing"] = json::array({"Old Concept Name"});
            vocab_lines.push_back(t);
            cohort_list.push_back(ui);
        }
        {
            const std::string ui = next_ui();
            vocab_lines.push_back(term_json(ui,
                                            "Concept " + std::to_string(term_counter) +
                                                " (geographical)",
                                            year, {"Z01.542." + std::to_string(++tree_counter)}));
            cohort_list.push_back(ui);
        }
        {
            const std::string ui = next_ui();
            vocab_lines.push_back(term_json(ui,
                                            "Concept " + std::to_string(term_counter) +
                                                " (preexisting)",
                                            year, {"D01.200." + std::to_string(++tree_counter)}));
            cohort_list.push_back(ui);
            add_article(year - 6, ui, true, false);
        }

        // Plant the cohort's top quartile: clinical terms carry weight 4.
        // Index 0 (the boundary term) stays out of the emerger pool.
        const size_t q4 = (selected.size() + 3) / 4;
        std::vector<double> weights(selected.size());
        for (size_t i = 0; i < selected.size(); ++i)
            weights[i] = i == 0 ? 0.0 : (clinical[i] ? 4.0 : 1.0);
        std::vector<bool> emerger(selected.size(), false);
        for (size_t i : weighted_sample_without_replacement(rng, weights, q4))
            emerger[i] = true;

        int clinical_seen = 0;
        for (size_t i = 0; i < selected.size(); ++i) {
            const std::string& ui = selected[i];
            fx.selected_uis.push_back(ui);
            fx.clinical_flag[ui] = clinical[i];
            fx.planted_emerger[ui] = emerger[i];

            // Emergers stay clearly above every non-emerger total even when
            // their trend dips: at least three fifths of their years run hot.
            const int span = horizon_year - year + 1;
            enum { kSustained, kNotSustained, kFluctuated } shape = kSustained;
            if (emerger[i] && span >= 6) {
                const double r = rng.uniform01();
                shape = r < 0.7 ? kSustained : r < 0.85 ? kNotSustained : kFluctuated;
            }
            const int dip_start = std::max(2, span * 3 / 5);
            const bool zero_count = !emerger[i] && rng.uniform01() < 0.05;
            for (int y = year; y <= horizon_year; ++y) {
                const int idx = y - year;
                bool low = false;
                if (shape == kNotSustained)
                    low = idx >= dip_start;
                else if (shape == kFluctuated)
                    low = idx == dip_start || idx == dip_start + 1;
                const int count = !emerger[i] ? (zero_count ? 0 : rng.uniform_int(0, 8))
                                  : low       ? rng.uniform_int(0, 8)
                                              : rng.uniform_int(26, 40);
                for (int a = 0; a < count; ++a)
                    add_article(y, ui, true, false);
            }
            if (clinical[i]) {
                const int lag = (++clinical_seen % 10 == 0) ? 0 : 5;
                fx.clinical_lag_years[ui] = lag;
                add_article(year + lag, ui, false, true);
            }
        }
        new_terms[std::to_string(year)] = cohort_list;
    }

    for (const json& line : vocab_lines)
        fx.vocab_jsonl += line.dump() + "\n";
    for (const json& line : article_lines)
        fx.corpus_jsonl += line.dump() + "\n";
    fx.new_terms_json = new_terms.dump(2) + "\n";
    std::sort(fx.selected_uis.begin(), fx.selected_uis.end());
    return fx;
}

FixturePaths write_fixture(const PlantedFixture& fixture, const std::string& dir) {
    FixturePaths paths{dir + "/vocab.jsonl", dir + "/new_terms.json", dir + "/corpus.jsonl"};
    io::write_file_atomic(paths.vocab, fixture.vocab_jsonl);
    io::write_file_atomic(paths.new_terms, fixture.new_terms_json);
    io::write_file_atomic(paths.corpus, fixture.corpus_jsonl);
    return paths;
}

namespace {

struct ParsedTerm {
    std::string label;
    bool major_only = false;       // [MAJR:noexp]
    bool clinical_trial = false;   // clinical trial[pt]
    int year_from = -1;
    int year_to = -1;
};

ParsedTerm parse_term_expression(const std::string& expr) {
    ParsedTerm q;
    size_t pos = 0;
    bool saw_label = false;
    while (pos < expr.size()) {
        size_t next = expr.find(" AND ", pos);
        const std::string clause =
            expr.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        pos = next == std::string::npos ? expr.size() : next + 5;

        if (!clause.empty() && clause.front() == '"') {
            const size_t close = clause.find('"', 1);
            if (close == std::string::npos)
                throw std::invalid_argument("bad term clause: " + clause);
            q.label = clause.substr(1, close - 1);
            const std::string field = clause.substr(close + 1);
            if (field == "[MAJR:noexp]")
                q.major_only = true;
            else if (field != "[MeSH Terms]")
                throw std::invalid_argument("unsupported field: " + field);
            saw_label = true;
        } else if (clause == "clinical trial[pt]") {
            q.clinical_trial = true;
        } else if (clause.size() > 4 && clause.substr(clause.size() - 4) == "[dp]") {
            const std::string range = clause.substr(0, clause.size() - 4);
            const size_t colon = range.find(':');
            if (colon == std::string::npos) {
                q.year_from = q.year_to = std::stoi(range);
            } else {
                q.year_from = std::stoi(range.substr(0, colon));
                q.year_to = std::stoi(range.substr(colon + 1));
            }
        } else {
            throw std::invalid_argument("unsupported clause: " + clause);
        }
    }
    if (!saw_label)
        throw std::invalid_argument("term expression lacks a label clause: " + expr);
    return q;
}

}  // namespace

long eval_esearch_query(const std::string& query, const std::vector<corpus::Article>& articles,
                        const std::map<std::string, std::string>& label_to_ui) {
    const auto params = corpus::parse_query(query);
    if (!params.count("term"))
        throw std::invalid_argument("query without term parameter");
    const ParsedTerm q = parse_term_expression(params.at("term"));

    const auto uit = label_to_ui.find(q.label);
    if (uit == label_to_ui.end())
        return 0;
    const std::string& ui = uit->second;

    long count = 0;
    for (const corpus::Article& a : articles) {
        if (q.year_from >= 0 && (a.year < q.year_from || a.year > q.year_to))
            continue;
        if (q.clinical_trial && !a.pub_types.count(corpus::kClinicalTrialType))
            continue;
        bool tagged = false;
        for (const corpus::Heading& h : a.headings) {
            if (h.ui == ui && (!q.major_only || h.major)) {
                tagged = true;
                break;
            }
        }
        if (tagged)
            ++count;
    }
    return count;
}

corpus::Transport make_mock_esearch_transport(
    std::shared_ptr<const std::vector<corpus::Article>> articles,
    std::shared_ptr<const std::map<std::string, std::string>> label_to_ui) {
    return [articles, label_to_ui](const std::string& query) -> corpus::HttpResponse {
        const long count = eval_esearch_query(query, *articles, *label_to_ui);
        json body{{"esearchresult", {{"count", std::to_string(count)}}}};
        return {200, body.dump()};
    };
}

}  // namespace meshtrace::testing
