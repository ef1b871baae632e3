#include "meshtrace/corpus.hpp"

#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace meshtrace::corpus {

using nlohmann::json;

long PopularitySeries::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0L);
}

PopularitySeries yearly_major_counts(const CorpusProvider& provider, const std::string& ui,
                                     int start_year, int end_year) {
    if (start_year > end_year)
        throw std::invalid_argument("yearly_major_counts: start_year > end_year");
    PopularitySeries series;
    series.ui = ui;
    series.start_year = start_year;
    series.end_year = end_year;
    series.counts.reserve(static_cast<size_t>(end_year - start_year + 1));
    for (int y = start_year; y <= end_year; ++y)
        series.counts.push_back(provider.major_count(ui, y));
    return series;
}

std::vector<Article> parse_articles(std::istream& in) {
    std::vector<Article> articles;
    std::unordered_set<std::string> seen;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("corpus line " + std::to_string(line_no) +
                                     ": invalid JSON: " + e.what());
        }
        if (!j.contains("pmid") || !j.contains("year"))
            throw std::runtime_error("corpus line " + std::to_string(line_no) +
                                     ": missing pmid or year");
        Article a;
        a.pmid = j.at("pmid").is_string() ? j.at("pmid").get<std::string>()
                                          : std::to_string(j.at("pmid").get<long>());
        a.year = j.at("year").get<int>();
        if (a.year < 1000 || a.year > 9999)
            throw std::runtime_error("corpus line " + std::to_string(line_no) +
                                     ": year is not a 4-digit calendar year");
        if (!seen.insert(a.pmid).second)
            throw std::runtime_error("corpus line " + std::to_string(line_no) +
                                     ": duplicate pmid " + a.pmid);
        for (const auto& pt : j.value("pub_types", json::array()))
            a.pub_types.insert(pt.get<std::string>());
        for (const auto& h : j.value("headings", json::array()))
            a.headings.push_back({h.at("ui").get<std::string>(), h.value("major", false)});
        articles.push_back(std::move(a));
    }
    return articles;
}

FixtureCorpus FixtureCorpus::load(std::istream& in) {
    return from_articles(parse_articles(in));
}

FixtureCorpus FixtureCorpus::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open corpus file: " + path);
    return load(in);
}

FixtureCorpus FixtureCorpus::from_articles(std::vector<Article> articles) {
    FixtureCorpus c;
    c.article_count_ = articles.size();
    for (const Article& a : articles) {
        // An article counts once per term even if it repeats a heading.
        std::set<std::string> major_uis;
        std::set<std::string> any_uis;
        for (const Heading& h : a.headings) {
            any_uis.insert(h.ui);
            if (h.major)
                major_uis.insert(h.ui);
        }
        for (const auto& ui : major_uis) {
            ++c.major_counts_[ui][a.year];
            auto [it, inserted] = c.first_major_year_.try_emplace(ui, a.year);
            if (!inserted && a.year < it->second)
                it->second = a.year;
        }
        if (a.pub_types.count(kClinicalTrialType)) {
            for (const auto& ui : any_uis) {
                auto [it, inserted] = c.first_clinical_year_.try_emplace(ui, a.year);
                if (!inserted && a.year < it->second)
                    it->second = a.year;
            }
        }
    }
    return c;
}

long FixtureCorpus::major_count(const std::string& ui, int year) const {
    auto it = major_counts_.find(ui);
    if (it == major_counts_.end())
        return 0;
    auto yit = it->second.find(year);
    return yit == it->second.end() ? 0 : yit->second;
}

std::optional<int> FixtureCorpus::first_indexed_year(const std::string& ui) const {
    auto it = first_major_year_.find(ui);
    if (it == first_major_year_.end())
        return std::nullopt;
    return it->second;
}

std::optional<int> FixtureCorpus::first_clinical_trial_year(const std::string& ui) const {
    auto it = first_clinical_year_.find(ui);
    if (it == first_clinical_year_.end())
        return std::nullopt;
    return it->second;
}

}  // namespace meshtrace::corpus
