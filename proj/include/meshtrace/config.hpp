#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meshtrace/live_client.hpp"
#include "meshtrace/model.hpp"
#include "meshtrace/profile.hpp"
#include "meshtrace/trend.hpp"

namespace meshtrace::cli {

// One JSON document drives a whole run; every output artifact embeds its
// hash and the seed. The API key never appears in serialized form.
struct RunConfig {
    std::string vocabulary_path;
    std::string new_terms_path;
    std::string corpus_path;          // fixture backend input
    std::string backend = "fixture";  // fixture | live
    corpus::LiveConfig live;

    int horizon_year = 2019;
    trend::TrendParams trend_params;
    profile::KeywordConfig keywords;
    std::string keyword_config_path;  // optional; overrides `keywords` when set

    model::FeatureConfig features;
    std::vector<char> test_categories{'B', 'C', 'D', 'E', 'G'};
    int k_folds = 5;
    int forecast_lo = 1;
    int forecast_hi = 10;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    static RunConfig from_json_file(const std::string& path);
    static RunConfig from_json_string(const std::string& text);

    // Canonical serialization (api_key excluded); config_hash fingerprints it.
    std::string to_json_string() const;
    std::string config_hash() const;

    profile::KeywordConfig effective_keywords() const;
    void validate() const;
};

}  // namespace meshtrace::cli
