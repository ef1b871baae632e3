#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "meshtrace/corpus.hpp"

namespace meshtrace::vocab {

struct TermRecord {
    std::string ui;
    std::string label;
    int year_added = 0;
    std::vector<std::string> tree_numbers;
    std::string annotation;
    std::string scope_note;
    std::vector<std::string> previously_indexing;
    bool deleted = false;
    std::optional<int> deleted_year;
};

// Distinct first letters of the term's tree numbers. Throws when the term has
// no tree numbers.
std::set<char> broad_categories(const TermRecord& term);

// broad_categories minus the non-subject branches V and Z. May be empty.
std::set<char> subject_categories(const TermRecord& term);

bool is_category_letter(char c);

// Human-readable name of a top-level category letter ("B" -> "Organisms").
std::string category_name(char letter);

// Immutable snapshot of the thesaurus plus the yearly new-term lists.
// Safe for concurrent readers once loaded.
class VocabularyDB {
public:
    VocabularyDB() = default;

    // term_stream: one JSON object per line (see README for keys).
    // new_term_lists: year -> list of ui.
    static VocabularyDB load(std::istream& term_stream,
                             const std::map<int, std::vector<std::string>>& new_term_lists);

    // Convenience wrapper reading the JSONL vocabulary and a JSON object
    // mapping year strings to ui arrays.
    static VocabularyDB load_files(const std::string& vocab_path,
                                   const std::string& new_terms_path);

    const TermRecord* find(const std::string& ui) const;
    const TermRecord& at(const std::string& ui) const;

    const std::map<std::string, TermRecord>& terms() const { return terms_; }
    const std::map<int, std::vector<std::string>>& new_terms_by_year() const {
        return new_terms_by_year_;
    }

    // ui of the term whose preferred label is `label`, if any.
    std::optional<std::string> ui_for_label(const std::string& label) const;

    bool has_direct_child_by(const TermRecord& term, int snapshot_year) const;

private:
    std::map<std::string, TermRecord> terms_;
    std::map<int, std::vector<std::string>> new_terms_by_year_;
    std::map<std::string, std::string> label_to_ui_;
    // parent tree number -> (year_added, ui) of terms holding a direct child
    std::map<std::string, std::vector<std::pair<int, std::string>>> children_of_;
};

// True iff some other term, added no later than this term's inclusion year,
// sits directly below one of its tree numbers.
bool has_narrower_at_inclusion(const VocabularyDB& db, const TermRecord& term);

enum class ExclusionReason { Deleted, PreviouslyIndexed, NonSubjectCategory, PreexistingConcept };

std::string to_string(ExclusionReason reason);

struct SelectionResult {
    int year = 0;
    std::vector<std::string> selected;
    std::vector<std::pair<std::string, ExclusionReason>> excluded;
};

// Applies the four exclusion rules in order: deleted, previously indexed,
// non-subject category (all tree numbers in V/Z), concept first indexed more
// than five years before inclusion. Terms with no indexed article at all are
// kept. Corpus failures abort the whole selection.
SelectionResult select_terms(const VocabularyDB& db, const corpus::CorpusProvider& provider,
                             int year);

}  // namespace meshtrace::vocab
