#include "meshtrace/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <stdexcept>

#include "json.hpp"

#include "meshtrace/io_util.hpp"

namespace meshtrace::vocab {

using nlohmann::json;

bool is_category_letter(char c) {
    return (c >= 'A' && c <= 'N') || c == 'V' || c == 'Z';
}

std::string category_name(char letter) {
    switch (letter) {
        case 'A': return "Anatomy";
        case 'B': return "Organisms";
        case 'C': return "Diseases";
        case 'D': return "Chemicals and Drugs";
        case 'E': return "Techniques and Equipment";
        case 'F': return "Psychiatry and Psychology";
        case 'G': return "Phenomena and Processes";
        case 'H': return "Disciplines and Occupations";
        case 'I': return "Anthropology, Education, Sociology, and Social Phenomena";
        case 'J': return "Technology, Industry, and Agriculture";
        case 'K': return "Humanities";
        case 'L': return "Information Science";
        case 'M': return "Named Groups";
        case 'N': return "Health Care";
        case 'V': return "Publication Characteristics";
        case 'Z': return "Geographicals";
        default: return std::string(1, letter);
    }
}

std::set<char> broad_categories(const TermRecord& term) {
    if (term.tree_numbers.empty())
        throw std::invalid_argument("term " + term.ui + " has no tree numbers");
    std::set<char> categories;
    for (const auto& tree : term.tree_numbers)
        categories.insert(tree.front());
    return categories;
}

std::set<char> subject_categories(const TermRecord& term) {
    std::set<char> categories = broad_categories(term);
    categories.erase('V');
    categories.erase('Z');
    return categories;
}

namespace {

// "B04.123.456" -> "B04.123"; top-level numbers have no parent.
std::optional<std::string> parent_tree(const std::string& tree) {
    size_t dot = tree.rfind('.');
    if (dot == std::string::npos)
        return std::nullopt;
    return tree.substr(0, dot);
}

TermRecord parse_term_line(const std::string& line, size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw std::runtime_error("vocabulary line " + std::to_string(line_no) +
                                 ": invalid JSON: " + e.what());
    }
    if (!j.contains("ui") || !j.contains("label") || !j.contains("year_added"))
        throw std::runtime_error("vocabulary line " + std::to_string(line_no) +
                                 ": missing ui, label or year_added");
    TermRecord t;
    t.ui = j.at("ui").get<std::string>();
    if (t.ui.empty())
        throw std::runtime_error("vocabulary line " + std::to_string(line_no) + ": empty ui");
    t.label = j.at("label").get<std::string>();
    t.year_added = j.at("year_added").get<int>();
    for (const auto& tree : j.value("tree_numbers", json::array())) {
        std::string s = tree.get<std::string>();
        if (s.empty() || !is_category_letter(s.front()))
            throw std::runtime_error("vocabulary line " + std::to_string(line_no) +
                                     ": tree number '" + s +
                                     "' does not start with a category letter");
        t.tree_numbers.push_back(std::move(s));
    }
    t.annotation = j.value("annotation", std::string());
    t.scope_note = j.value("scope_note", std::string());
    for (const auto& p : j.value("previously_indexing", json::array()))
        t.previously_indexing.push_back(p.get<std::string>());
    t.deleted = j.value("deleted", false);
    if (j.contains("deleted_year") && !j.at("deleted_year").is_null()) {
        t.deleted_year = j.at("deleted_year").get<int>();
        if (!t.deleted)
            throw std::runtime_error("vocabulary line " + std::to_string(line_no) +
                                     ": deleted_year present but deleted is false");
        if (*t.deleted_year < t.year_added)
            throw std::runtime_error("vocabulary line " + std::to_string(line_no) +
                                     ": deleted_year precedes year_added");
    }
    return t;
}

}  // namespace

VocabularyDB VocabularyDB::load(std::istream& term_stream,
                                const std::map<int, std::vector<std::string>>& new_term_lists) {
    VocabularyDB db;
    std::string line;
    size_t line_no = 0;
    while (std::getline(term_stream, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        TermRecord t = parse_term_line(line, line_no);
        auto [it, inserted] = db.terms_.emplace(t.ui, std::move(t));
        if (!inserted)
            throw std::runtime_error("duplicate ui in vocabulary: " + it->first);
    }

    std::map<std::string, int> claimed;
    for (const auto& [year, uis] : new_term_lists) {
        for (const auto& ui : uis) {
            if (!db.terms_.count(ui))
                throw std::runtime_error("new-term list for " + std::to_string(year) +
                                         " references unknown ui " + ui);
            auto [it, inserted] = claimed.emplace(ui, year);
            if (!inserted)
                throw std::runtime_error("ui " + ui + " appears in new-term lists for both " +
                                         std::to_string(it->second) + " and " +
                                         std::to_string(year));
        }
        db.new_terms_by_year_[year] = uis;
    }

    for (const auto& [ui, term] : db.terms_) {
        db.label_to_ui_.emplace(term.label, ui);
        for (const auto& tree : term.tree_numbers) {
            if (auto parent = parent_tree(tree))
                db.children_of_[*parent].emplace_back(term.year_added, ui);
        }
    }
    return db;
}

VocabularyDB VocabularyDB::load_files(const std::string& vocab_path,
                                      const std::string& new_terms_path) {
    std::ifstream terms(vocab_path);
    if (!terms)
        throw std::runtime_error("cannot open vocabulary file: " + vocab_path);

    json lists_json;
    try {
        lists_json = json::parse(io::read_file(new_terms_path));
    } catch (const json::exception& e) {
        throw std::runtime_error("new-term list file " + new_terms_path + ": invalid JSON: " +
                                 e.what());
    }
    std::map<int, std::vector<std::string>> lists;
    for (const auto& [year_str, uis] : lists_json.items()) {
        int year = std::stoi(year_str);
        lists[year] = uis.get<std::vector<std::string>>();
    }
    return load(terms, lists);
}

const TermRecord* VocabularyDB::find(const std::string& ui) const {
    auto it = terms_.find(ui);
    return it == terms_.end() ? nullptr : &it->second;
}

const TermRecord& VocabularyDB::at(const std::string& ui) const {
    const TermRecord* t = find(ui);
    if (!t)
        throw std::out_of_range("unknown ui: " + ui);
    return *t;
}

std::optional<std::string> VocabularyDB::ui_for_label(const std::string& label) const {
    auto it = label_to_ui_.find(label);
    if (it == label_to_ui_.end())
        return std::nullopt;
    return it->second;
}

bool VocabularyDB::has_direct_child_by(const TermRecord& term, int snapshot_year) const {
    for (const auto& tree : term.tree_numbers) {
        auto it = children_of_.find(tree);
        if (it == children_of_.end())
            continue;
        for (const auto& [year_added, ui] : it->second) {
            if (year_added <= snapshot_year && ui != term.ui)
                return true;
        }
    }
    return false;
}

bool has_narrower_at_inclusion(const VocabularyDB& db, const TermRecord& term) {
    return db.has_direct_child_by(term, term.year_added);
}

std::string to_string(ExclusionReason reason) {
    switch (reason) {
        case ExclusionReason::Deleted: return "Deleted";
        case ExclusionReason::PreviouslyIndexed: return "PreviouslyIndexed";
        case ExclusionReason::NonSubjectCategory: return "NonSubjectCategory";
        case ExclusionReason::PreexistingConcept: return "PreexistingConcept";
    }
    return "?";
}

namespace {

bool all_trees_non_subject(const TermRecord& term) {
    // A term with no tree numbers carries no subject category either.
    for (const auto& tree : term.tree_numbers) {
        char c = tree.front();
        if (c != 'V' && c != 'Z')
            return false;
    }
    return true;
}

}  // namespace

SelectionResult select_terms(const VocabularyDB& db, const corpus::CorpusProvider& provider,
                             int year) {
    auto it = db.new_terms_by_year().find(year);
    if (it == db.new_terms_by_year().end())
        throw std::invalid_argument("no new-term list for year " + std::to_string(year));

    SelectionResult result;
    result.year = year;
    for (const auto& ui : it->second) {
        const TermRecord* term = db.find(ui);
        // Unreachable through load(), which validates list membership; kept so
        // a record expunged from the snapshot reads as deleted.
        if (!term || term->deleted) {
            result.excluded.emplace_back(ui, ExclusionReason::Deleted);
            continue;
        }
        if (!term->previously_indexing.empty()) {
            result.excluded.emplace_back(ui, ExclusionReason::PreviouslyIndexed);
            continue;
        }
        if (all_trees_non_subject(*term)) {
            result.excluded.emplace_back(ui, ExclusionReason::NonSubjectCategory);
            continue;
        }
        std::optional<int> first_year = provider.first_indexed_year(ui);
        if (first_year && *first_year < term->year_added - 5) {
            result.excluded.emplace_back(ui, ExclusionReason::PreexistingConcept);
            continue;
        }
        result.selected.push_back(ui);
    }
    return result;
}

}  // namespace meshtrace::vocab
