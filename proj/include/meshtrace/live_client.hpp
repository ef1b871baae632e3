#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "meshtrace/corpus.hpp"

namespace meshtrace::corpus {

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResponseParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HttpResponse {
    int status = 0;  // 0 = transport-level failure
    std::string body;
};

// Takes the encoded query string ("db=pubmed&..."); the endpoint itself is
// baked into the transport.
using Transport = std::function<HttpResponse(const std::string& query)>;

// Time source and sleeper, injectable so tests can drive a fake clock.
struct Clock {
    std::function<std::chrono::steady_clock::time_point()> now;
    std::function<void(std::chrono::milliseconds)> sleep_for;

    static Clock system();
};

// Sliding-window limiter: at most max_per_second admissions in any rolling
// one-second window. Admission is serialized across threads.
class RateLimiter {
public:
    RateLimiter(int max_per_second, Clock clock);
    void acquire();

private:
    int max_per_second_;
    Clock clock_;
    std::mutex mutex_;
    std::deque<std::chrono::steady_clock::time_point> admitted_;
};

struct LiveConfig {
    std::string base_url = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esearch.fcgi";
    std::string api_key;
    int rate_per_second = 0;  // 0 = 3 without an API key, 10 with one
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{500};
    // Year window scanned when locating first occurrences.
    int scan_floor_year = 1946;
    int scan_ceiling_year = 2025;

    int effective_rate() const;

    // Key-value file, one "key=value" per line; keys match the field names.
    static LiveConfig from_kv_file(const std::string& path);
    // MESHTRACE_API_KEY / MESHTRACE_BASE_URL take precedence when set.
    void apply_env_overrides();
};

std::string percent_encode(const std::string& s);
std::string percent_decode(const std::string& s);

// Splits "a=1&b=x%20y" into decoded key/value pairs.
std::map<std::string, std::string> parse_query(const std::string& query);

// Count-only esearch client. Each request passes the rate limiter; 429 and
// 5xx responses are retried with exponential backoff up to max_retries.
class EsearchClient {
public:
    EsearchClient(LiveConfig config, Transport transport, Clock clock = Clock::system());

    // Result count for a PubMed-style term expression.
    long count(const std::string& term_expression);

    const LiveConfig& config() const { return config_; }

private:
    LiveConfig config_;
    Transport transport_;
    Clock clock_;
    RateLimiter limiter_;
};

// CorpusProvider backed by count queries against an esearch-compatible
// endpoint. Queries go by term label, so a ui -> label resolver is required.
// Responses are cached for the lifetime of the provider.
class LiveCorpus final : public CorpusProvider {
public:
    using LabelResolver = std::function<std::string(const std::string& ui)>;

    LiveCorpus(LiveConfig config, Transport transport, LabelResolver resolver,
               Clock clock = Clock::system());

    long major_count(const std::string& ui, int year) const override;
    std::optional<int> first_indexed_year(const std::string& ui) const override;
    std::optional<int> first_clinical_trial_year(const std::string& ui) const override;

private:
    long cached_count(const std::string& expression) const;
    // Smallest year in the scan window with a positive cumulative count, by
    // bisection over [floor, y] range queries.
    std::optional<int> first_year_by_bisection(const std::string& base_expression) const;

    mutable EsearchClient client_;
    LabelResolver resolver_;
    int floor_year_;
    int ceiling_year_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::string, long> count_cache_;
};

// Real HTTP transport for `endpoint_url` ("https://host[:port]/path").
Transport make_httplib_transport(const std::string& endpoint_url);

}  // namespace meshtrace::corpus
