#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace meshtrace::corpus {

// Publication type string that marks clinical-trial articles. Matched
// case-sensitively against pub_types entries.
inline constexpr const char* kClinicalTrialType = "Clinical Trial";

struct Heading {
    std::string ui;
    bool major = false;
};

struct Article {
    std::string pmid;
    int year = 0;
    std::set<std::string> pub_types;
    std::vector<Heading> headings;
};

// Per-year counts of articles indexed with one term as major topic,
// descendants excluded. One entry per year in [start_year, end_year].
struct PopularitySeries {
    std::string ui;
    int start_year = 0;
    int end_year = 0;
    std::vector<long> counts;

    long total() const;
    int num_years() const { return end_year - start_year + 1; }
};

// Answers count and first-occurrence queries for terms. Implementations must
// be referentially transparent within a run: the same query always returns
// the same answer.
class CorpusProvider {
public:
    virtual ~CorpusProvider() = default;

    // Number of distinct articles published in `year` carrying (ui, major=true).
    virtual long major_count(const std::string& ui, int year) const = 0;

    // Earliest publication year among articles carrying (ui, major=true).
    virtual std::optional<int> first_indexed_year(const std::string& ui) const = 0;

    // Earliest publication year among clinical-trial articles carrying ui with
    // any major flag.
    virtual std::optional<int> first_clinical_trial_year(const std::string& ui) const = 0;
};

PopularitySeries yearly_major_counts(const CorpusProvider& provider, const std::string& ui,
                                     int start_year, int end_year);

// One JSON object per line: {"pmid": ..., "year": ..., "pub_types": [...],
// "headings": [{"ui": ..., "major": ...}, ...]}. Throws on malformed lines
// and duplicate pmids.
std::vector<Article> parse_articles(std::istream& in);

class FixtureCorpus final : public CorpusProvider {
public:
    static FixtureCorpus load(std::istream& in);
    static FixtureCorpus load_file(const std::string& path);
    static FixtureCorpus from_articles(std::vector<Article> articles);

    long major_count(const std::string& ui, int year) const override;
    std::optional<int> first_indexed_year(const std::string& ui) const override;
    std::optional<int> first_clinical_trial_year(const std::string& ui) const override;

    size_t article_count() const { return article_count_; }

private:
    FixtureCorpus() = default;

    size_t article_count_ = 0;
    // ui -> year -> distinct article count with major=true
    std::map<std::string, std::map<int, long>> major_counts_;
    std::map<std::string, int> first_major_year_;
    std::map<std::string, int> first_clinical_year_;
};

}  // namespace meshtrace::corpus
