#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "meshtrace/config.hpp"
#include "meshtrace/corpus.hpp"
#include "meshtrace/live_client.hpp"
#include "meshtrace/profile.hpp"
#include "meshtrace/trend.hpp"
#include "meshtrace/vocab.hpp"

namespace meshtrace::cli {

// Everything the commands derive from the inputs. Built once per run.
struct PipelineData {
    vocab::VocabularyDB db;
    std::unique_ptr<corpus::CorpusProvider> provider;
    std::map<int, vocab::SelectionResult> selection;  // by cohort year
    std::vector<std::string> selected_uis;            // sorted
    std::map<std::string, corpus::PopularitySeries> series;
    std::map<std::string, trend::QuartileLabel> quartiles;
    std::vector<profile::TopicProfile> profiles;  // sorted by ui
    std::map<std::string, bool> labels;           // emerging = Q4 at full horizon
};

// transport overrides the live backend's HTTP layer (tests inject mocks);
// ignored for the fixture backend.
PipelineData load_pipeline(const RunConfig& config, corpus::Transport transport = nullptr);

// Each command loads the pipeline, writes its files under config.out_dir and
// throws on failure. Files are written atomically and carry the config hash
// and seed in a leading comment (CSV) or a "meta" object (JSON).
void cmd_select(const RunConfig& config, corpus::Transport transport = nullptr);
void cmd_counts(const RunConfig& config, corpus::Transport transport = nullptr);
void cmd_profile(const RunConfig& config, corpus::Transport transport = nullptr);
void cmd_analyze(const RunConfig& config, corpus::Transport transport = nullptr);
void cmd_train(const RunConfig& config, corpus::Transport transport = nullptr);
void cmd_lag(const RunConfig& config, corpus::Transport transport = nullptr);
void cmd_all(const RunConfig& config, corpus::Transport transport = nullptr);

}  // namespace meshtrace::cli
