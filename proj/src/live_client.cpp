#include "meshtrace/live_client.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

namespace meshtrace::corpus {

using nlohmann::json;

Clock Clock::system() {
    Clock c;
    c.now = [] { return std::chrono::steady_clock::now(); };
    c.sleep_for = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    return c;
}

RateLimiter::RateLimiter(int max_per_second, Clock clock)
    : max_per_second_(max_per_second), clock_(std::move(clock)) {
    if (max_per_second_ < 1)
        throw std::invalid_argument("RateLimiter: rate must be >= 1 per second");
}

void RateLimiter::acquire() {
    using namespace std::chrono;
    std::lock_guard<std::mutex> lock(mutex_);
    for (;;) {
        const auto now = clock_.now();
        while (!admitted_.empty() && now - admitted_.front() >= seconds(1))
            admitted_.pop_front();
        if (admitted_.size() < static_cast<size_t>(max_per_second_)) {
            admitted_.push_back(now);
            return;
        }
        const auto wait = duration_cast<milliseconds>(admitted_.front() + seconds(1) - now);
        clock_.sleep_for(wait > milliseconds(0) ? wait + milliseconds(1) : milliseconds(1));
    }
}

int LiveConfig::effective_rate() const {
    if (rate_per_second > 0)
        return rate_per_second;
    return api_key.empty() ? 3 : 10;
}

LiveConfig LiveConfig::from_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open live-backend config: " + path);
    LiveConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("live-backend config " + path + ": expected key=value: " +
                                     line);
        const std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (!value.empty() && value.back() == '\r')
            value.pop_back();
        if (key == "base_url")
            cfg.base_url = value;
        else if (key == "api_key")
            cfg.api_key = value;
        else if (key == "rate_per_second")
            cfg.rate_per_second = std::stoi(value);
        else if (key == "max_retries")
            cfg.max_retries = std::stoi(value);
        else if (key == "backoff_ms")
            cfg.backoff_base = std::chrono::milliseconds(std::stol(value));
        else if (key == "scan_floor_year")
            cfg.scan_floor_year = std::stoi(value);
        else if (key == "scan_ceiling_year")
            cfg.scan_ceiling_year = std::stoi(value);
        else
            throw std::runtime_error("live-backend config " + path + ": unknown key " + key);
    }
    return cfg;
}

void LiveConfig::apply_env_overrides() {
    if (const char* key = std::getenv("MESHTRACE_API_KEY"))
        api_key = key;
    if (const char* url = std::getenv("MESHTRACE_BASE_URL"))
        base_url = url;
}

std::string percent_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
            c == '-' || c == '.' || c == '_' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xF];
        }
    }
    return out;
}

std::string percent_decode(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            out += static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16));
            i += 2;
        } else if (s[i] == '+') {
            out += ' ';
        } else {
            out += s[i];
        }
    }
    return out;
}

std::map<std::string, std::string> parse_query(const std::string& query) {
    std::map<std::string, std::string> params;
    std::istringstream in(query);
    std::string pair;
    while (std::getline(in, pair, '&')) {
        if (pair.empty())
            continue;
        const size_t eq = pair.find('=');
        if (eq == std::string::npos)
            params[percent_decode(pair)] = "";
        else
            params[percent_decode(pair.substr(0, eq))] = percent_decode(pair.substr(eq + 1));
    }
    return params;
}

EsearchClient::EsearchClient(LiveConfig config, Transport transport, Clock clock)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      clock_(clock),
      limiter_(config_.effective_rate(), clock) {
    if (!transport_)
        throw std::invalid_argument("EsearchClient: missing transport");
}

long EsearchClient::count(const std::string& term_expression) {
    std::string query = "db=pubmed&retmode=json&rettype=count&term=" +
                        percent_encode(term_expression);
    if (!config_.api_key.empty())
        query += "&api_key=" + percent_encode(config_.api_key);

    HttpResponse response;
    for (int attempt = 0;; ++attempt) {
        limiter_.acquire();
        response = transport_(query);
        if (response.status == 200)
            break;
        const bool retryable =
            response.status == 0 || response.status == 429 || response.status >= 500;
        if (!retryable)
            throw TransportError("esearch request failed with status " +
                                 std::to_string(response.status));
        if (attempt >= config_.max_retries)
            throw TransportError("esearch request failed after " +
                                 std::to_string(config_.max_retries + 1) +
                                 " attempts, last status " + std::to_string(response.status));
        clock_.sleep_for(config_.backoff_base * (1L << attempt));
    }

    try {
        const json j = json::parse(response.body);
        const json& count = j.at("esearchresult").at("count");
        // E-utilities serializes the count as a string.
        return count.is_string() ? std::stol(count.get<std::string>()) : count.get<long>();
    } catch (const std::exception& e) {
        throw ResponseParseError(std::string("unparsable esearch response: ") + e.what());
    }
}

namespace {

std::string year_clause(int year) {
    return std::to_string(year) + "[dp]";
}

std::string range_clause(int from, int to) {
    return std::to_string(from) + ":" + std::to_string(to) + "[dp]";
}

}  // namespace

LiveCorpus::LiveCorpus(LiveConfig config, Transport transport, LabelResolver resolver,
                       Clock clock)
    : client_(std::move(config), std::move(transport), std::move(clock)),
      resolver_(std::move(resolver)),
      floor_year_(client_.config().scan_floor_year),
      ceiling_year_(client_.config().scan_ceiling_year) {
    if (!resolver_)
        throw std::invalid_argument("LiveCorpus: missing label resolver");
}

long LiveCorpus::cached_count(const std::string& expression) const {
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = count_cache_.find(expression);
        if (it != count_cache_.end())
            return it->second;
    }
    const long n = client_.count(expression);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    count_cache_.emplace(expression, n);
    return n;
}

long LiveCorpus::major_count(const std::string& ui, int year) const {
    const std::string expr =
        "\"" + resolver_(ui) + "\"[MAJR:noexp] AND " + year_clause(year);
    return cached_count(expr);
}

std::optional<int> LiveCorpus::first_year_by_bisection(const std::string& base) const {
    if (cached_count(base + " AND " + range_clause(floor_year_, ceiling_year_)) == 0)
        return std::nullopt;
    int lo = floor_year_;
    int hi = ceiling_year_;
    // Invariant: count over [floor, hi] is positive.
    while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (cached_count(base + " AND " + range_clause(floor_year_, mid)) > 0)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

std::optional<int> LiveCorpus::first_indexed_year(const std::string& ui) const {
    return first_year_by_bisection("\"" + resolver_(ui) + "\"[MAJR:noexp]");
}

std::optional<int> LiveCorpus::first_clinical_trial_year(const std::string& ui) const {
    return first_year_by_bisection("\"" + resolver_(ui) +
                                   "\"[MeSH Terms] AND clinical trial[pt]");
}

Transport make_httplib_transport(const std::string& endpoint_url) {
    // Split scheme://host[:port] from the path.
    const size_t scheme_end = endpoint_url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("transport endpoint must include a scheme: " + endpoint_url);
    const size_t path_start = endpoint_url.find('/', scheme_end + 3);
    const std::string origin =
        path_start == std::string::npos ? endpoint_url : endpoint_url.substr(0, path_start);
    const std::string path =
        path_start == std::string::npos ? "/" : endpoint_url.substr(path_start);

    auto client = std::make_shared<httplib::Client>(origin);
    client->set_connection_timeout(10, 0);
    client->set_read_timeout(30, 0);
    return [client, path](const std::string& query) -> HttpResponse {
        const auto result = client->Get(path + "?" + query);
        if (!result)
            return {0, httplib::to_string(result.error())};
        return {result->status, result->body};
    };
}

}  // namespace meshtrace::corpus
