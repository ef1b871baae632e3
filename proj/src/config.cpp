#include "meshtrace/config.hpp"

#include <set>
#include <stdexcept>

#include "json.hpp"

#include "meshtrace/io_util.hpp"

namespace meshtrace::cli {

using nlohmann::json;

namespace {

std::vector<char> parse_letters(const std::string& s, const std::string& what) {
    std::vector<char> letters;
    for (char c : s) {
        if (!vocab::is_category_letter(c))
            throw std::runtime_error(what + ": '" + std::string(1, c) +
                                     "' is not a category letter");
        letters.push_back(c);
    }
    if (letters.empty())
        throw std::runtime_error(what + ": empty");
    return letters;
}

void require_known_keys(const json& j, const std::set<std::string>& known,
                        const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            throw std::runtime_error("config: unknown key \"" + key + "\" in " + where);
}

}  // namespace

RunConfig RunConfig::from_json_file(const std::string& path) {
    return from_json_string(io::read_file(path));
}

RunConfig RunConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
    }
    require_known_keys(j,
                       {"vocabulary", "new_terms", "corpus", "backend", "live", "horizon_year",
                        "trend", "keywords", "keyword_config", "dummy_categories",
                        "per_occurrence_rows", "test_categories", "k_folds", "forecast_years",
                        "seed", "out_dir"},
                       "top level");

    RunConfig cfg;
    cfg.vocabulary_path = j.value("vocabulary", std::string());
    cfg.new_terms_path = j.value("new_terms", std::string());
    cfg.corpus_path = j.value("corpus", std::string());
    cfg.backend = j.value("backend", std::string("fixture"));
    if (j.contains("live")) {
        const json& l = j.at("live");
        require_known_keys(l,
                           {"base_url", "api_key", "rate_per_second", "max_retries",
                            "backoff_ms", "scan_floor_year", "scan_ceiling_year"},
                           "live");
        cfg.live.base_url = l.value("base_url", cfg.live.base_url);
        cfg.live.api_key = l.value("api_key", cfg.live.api_key);
        cfg.live.rate_per_second = l.value("rate_per_second", cfg.live.rate_per_second);
        cfg.live.max_retries = l.value("max_retries", cfg.live.max_retries);
        cfg.live.backoff_base =
            std::chrono::milliseconds(l.value("backoff_ms", cfg.live.backoff_base.count()));
        cfg.live.scan_floor_year = l.value("scan_floor_year", cfg.live.scan_floor_year);
        cfg.live.scan_ceiling_year = l.value("scan_ceiling_year", cfg.live.scan_ceiling_year);
    }
    cfg.horizon_year = j.value("horizon_year", cfg.horizon_year);
    if (j.contains("trend")) {
        const json& t = j.at("trend");
        require_known_keys(t, {"threshold", "dip_len"}, "trend");
        cfg.trend_params.threshold = t.value("threshold", cfg.trend_params.threshold);
        cfg.trend_params.dip_len = t.value("dip_len", cfg.trend_params.dip_len);
    }
    if (j.contains("keywords")) {
        const json& k = j.at("keywords");
        require_known_keys(k, {"human_markers", "nonhuman_markers"}, "keywords");
        if (k.contains("human_markers"))
            cfg.keywords.human_markers = k.at("human_markers").get<std::vector<std::string>>();
        if (k.contains("nonhuman_markers"))
            cfg.keywords.nonhuman_markers =
                k.at("nonhuman_markers").get<std::vector<std::string>>();
    }
    cfg.keyword_config_path = j.value("keyword_config", std::string());
    if (j.contains("dummy_categories"))
        cfg.features.dummy_categories =
            parse_letters(j.at("dummy_categories").get<std::string>(), "dummy_categories");
    cfg.features.per_occurrence_rows =
        j.value("per_occurrence_rows", cfg.features.per_occurrence_rows);
    if (j.contains("test_categories"))
        cfg.test_categories =
            parse_letters(j.at("test_categories").get<std::string>(), "test_categories");
    cfg.k_folds = j.value("k_folds", cfg.k_folds);
    if (j.contains("forecast_years")) {
        const auto range = j.at("forecast_years").get<std::vector<int>>();
        if (range.size() != 2)
            throw std::runtime_error("config: forecast_years must be [first, last]");
        cfg.forecast_lo = range[0];
        cfg.forecast_hi = range[1];
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.validate();
    return cfg;
}

std::string RunConfig::to_json_string() const {
    json j;
    j["vocabulary"] = vocabulary_path;
    j["new_terms"] = new_terms_path;
    j["corpus"] = corpus_path;
    j["backend"] = backend;
    j["live"] = {{"base_url", live.base_url},
                 {"rate_per_second", live.rate_per_second},
                 {"max_retries", live.max_retries},
                 {"backoff_ms", live.backoff_base.count()},
                 {"scan_floor_year", live.scan_floor_year},
                 {"scan_ceiling_year", live.scan_ceiling_year}};
    j["horizon_year"] = horizon_year;
    j["trend"] = {{"threshold", trend_params.threshold}, {"dip_len", trend_params.dip_len}};
    j["keywords"] = {{"human_markers", keywords.human_markers},
                     {"nonhuman_markers", keywords.nonhuman_markers}};
    j["keyword_config"] = keyword_config_path;
    j["dummy_categories"] =
        std::string(features.dummy_categories.begin(), features.dummy_categories.end());
    j["per_occurrence_rows"] = features.per_occurrence_rows;
    j["test_categories"] = std::string(test_categories.begin(), test_categories.end());
    j["k_folds"] = k_folds;
    j["forecast_years"] = {forecast_lo, forecast_hi};
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    return j.dump(2);
}

std::string RunConfig::config_hash() const {
    return io::hex64(io::fnv1a(to_json_string()));
}

profile::KeywordConfig RunConfig::effective_keywords() const {
    if (!keyword_config_path.empty())
        return profile::KeywordConfig::load_kv_file(keyword_config_path);
    return keywords;
}

void RunConfig::validate() const {
    if (backend != "fixture" && backend != "live")
        throw std::runtime_error("config: backend must be \"fixture\" or \"live\"");
    if (vocabulary_path.empty())
        throw std::runtime_error("config: vocabulary path is required");
    if (new_terms_path.empty())
        throw std::runtime_error("config: new_terms path is required");
    if (backend == "fixture" && corpus_path.empty())
        throw std::runtime_error("config: corpus path is required for the fixture backend");
    if (trend_params.threshold < 1 || trend_params.dip_len < 1)
        throw std::runtime_error("config: trend threshold and dip_len must be >= 1");
    if (k_folds < 2)
        throw std::runtime_error("config: k_folds must be >= 2");
    if (forecast_lo < 1 || forecast_hi < forecast_lo)
        throw std::runtime_error("config: forecast_years must satisfy 1 <= first <= last");
}

}  // namespace meshtrace::cli
