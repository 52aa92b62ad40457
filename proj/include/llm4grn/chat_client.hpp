#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "llm4grn/common.hpp"

namespace llm4grn {

struct ClientError : Error {
    using Error::Error;
};
struct OfflineMissError : ClientError {
    using ClientError::ClientError;
};
struct HttpError : ClientError {
    using ClientError::ClientError;
};

struct ChatRequest {
    std::string model;
    double temperature = 0.0;
    std::string system;
    std::string user;
    int attempt = 0;  // distinguishes retries of an otherwise identical prompt

    // Stable content key over every field, including the attempt counter,
    // so a retry is a distinct cache entry rather than a replay.
    std::string digest() const;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

// Append-only JSONL store of completed requests, keyed by request digest.
// Safe for concurrent insertion from worker threads.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path path);

    std::optional<std::string> lookup(const std::string& digest) const;
    void insert(const ChatRequest& request, const std::string& response);
    std::size_t size() const;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::map<std::string, std::string> responses_;
};

// Replays responses recorded in a cache file; never performs network IO.
// A request absent from the transcript is an OfflineMissError.
class FixtureClient : public ChatClient {
public:
    explicit FixtureClient(const std::filesystem::path& transcript);
    std::string complete(const ChatRequest& request) override;
    std::size_t size() const { return responses_.size(); }

private:
    std::map<std::string, std::string> responses_;
};

// Read-through wrapper: serves cached responses and records fresh ones.
class CachingClient : public ChatClient {
public:
    CachingClient(std::shared_ptr<ChatClient> inner, std::shared_ptr<ResponseCache> cache);
    std::string complete(const ChatRequest& request) override;

private:
    std::shared_ptr<ChatClient> inner_;
    std::shared_ptr<ResponseCache> cache_;
};

struct HttpClientConfig {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string api_key_env = "LLM4GRN_API_KEY";
    int timeout_seconds = 120;
    int max_attempts = 4;     // transport retries on 429 and 5xx
    int backoff_ms = 500;     // doubled after each failed attempt
};

// OpenAI-style chat-completions client. The API key is read from the
// environment variable named in the config at call time.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(HttpClientConfig config);
    std::string complete(const ChatRequest& request) override;

private:
    HttpClientConfig config_;
};

}  // namespace llm4grn
