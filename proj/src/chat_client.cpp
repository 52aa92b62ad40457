#include "llm4grn/chat_client.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace llm4grn {

namespace {

using nlohmann::json;

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Parses one transcript line into (digest, response); malformed lines throw.
std::pair<std::string, std::string> parse_transcript_line(const std::string& line,
                                                          const std::filesystem::path& path,
                                                          std::size_t line_no) {
    json entry;
    try {
        entry = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": bad JSON line: " + e.what());
    }
    if (!entry.contains("digest") || !entry.contains("response"))
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": transcript line lacks digest/response");
    return {entry["digest"].get<std::string>(), entry["response"].get<std::string>()};
}

}  // namespace

std::string ChatRequest::digest() const {
    std::uint64_t h = fnv1a64_mix(0, model);
    h = fnv1a64_mix(h, format_double(temperature));
    h = fnv1a64_mix(h, system);
    h = fnv1a64_mix(h, user);
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(attempt));
    return hex64(h);
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // a fresh cache starts empty
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto [digest, response] = parse_transcript_line(line, path_, line_no);
        responses_[digest] = std::move(response);
    }
}

std::optional<std::string> ResponseCache::lookup(const std::string& digest) const {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = responses_.find(digest);
    if (it == responses_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::insert(const ChatRequest& request, const std::string& response) {
    std::lock_guard<std::mutex> lock(mutex_);
    const std::string digest = request.digest();
    if (responses_.count(digest)) return;
    json entry{{"digest", digest},
               {"model", request.model},
               {"temperature", request.temperature},
               {"attempt", request.attempt},
               {"system", request.system},
               {"user", request.user},
               {"response", response},
               {"timestamp", utc_timestamp()}};
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error("cannot append to response cache " + path_.string());
    out << entry.dump() << '\n';
    out.flush();
    if (!out) throw Error("failed writing response cache " + path_.string());
    responses_[digest] = response;
}

std::size_t ResponseCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return responses_.size();
}

FixtureClient::FixtureClient(const std::filesystem::path& transcript) {
    std::ifstream in(transcript);
    if (!in) throw ClientError("cannot open transcript " + transcript.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto [digest, response] = parse_transcript_line(line, transcript, line_no);
        responses_[digest] = std::move(response);
    }
}

std::string FixtureClient::complete(const ChatRequest& request) {
    const auto it = responses_.find(request.digest());
    if (it == responses_.end())
        throw OfflineMissError("no recorded response for request digest " + request.digest());
    return it->second;
}

CachingClient::CachingClient(std::shared_ptr<ChatClient> inner,
                             std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {
    if (!inner_ || !cache_) throw Error("caching client needs both a client and a cache");
}

std::string CachingClient::complete(const ChatRequest& request) {
    if (auto hit = cache_->lookup(request.digest())) return *hit;
    std::string response = inner_->complete(request);
    cache_->insert(request, response);
    return response;
}

HttpChatClient::HttpChatClient(HttpClientConfig config) : config_(std::move(config)) {}

std::string HttpChatClient::complete(const ChatRequest& request) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
        throw ClientError("environment variable " + config_.api_key_env + " is not set");

    const json body{{"model", request.model},
                    {"temperature", request.temperature},
                    {"messages", json::array({json{{"role", "system"}, {"content", request.system}},
                                              json{{"role", "user"}, {"content", request.user}}})}};
    const std::string payload = body.dump();
    const httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};

    int backoff = config_.backoff_ms;
    std::string last_failure = "no attempt made";
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_seconds);
        client.set_read_timeout(config_.timeout_seconds);
        auto result = client.Post(config_.path, headers, payload, "application/json");
        if (!result) {
            last_failure = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status == 429 || result->status >= 500) {
            last_failure = "HTTP " + std::to_string(result->status);
            continue;
        }
        if (result->status != 200)
            throw HttpError("chat endpoint returned HTTP " + std::to_string(result->status) +
                            ": " + result->body);
        try {
            const json reply = json::parse(result->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw HttpError(std::string("malformed chat completion payload: ") + e.what());
        }
    }
    throw HttpError("chat endpoint unavailable after " + std::to_string(config_.max_attempts) +
                    " attempts (" + last_failure + ")");
}

}  // namespace llm4grn
