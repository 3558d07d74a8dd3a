#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mobilegen {

enum class Role { system, user, assistant };

std::string_view to_string(Role role) noexcept;

struct ImagePayload {
    std::string mime_type = "image/png";
    std::string bytes;
};

using ContentPart = std::variant<std::string, ImagePayload>;

struct ChatMessage {
    Role role = Role::user;
    std::vector<ContentPart> parts;

    static ChatMessage text(Role role, std::string body)
    {
        return ChatMessage{role, {ContentPart{std::move(body)}}};
    }
};

// Generation runs at temperature 0.0 and profiling at 0.2 by default; callers
// set the value explicitly from their config.
struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 1024;
    // Forwarded as the wire "seed"; also distinguishes Pass@K samples.
    std::optional<std::uint64_t> seed;

    // All text parts joined by newlines, images skipped.
    std::string text() const;
    std::size_t image_count() const;
    void validate() const;

    static ChatRequest user_prompt(std::string prompt, double temperature)
    {
        ChatRequest r;
        r.messages.push_back(ChatMessage::text(Role::user, std::move(prompt)));
        r.temperature = temperature;
        return r;
    }
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    TokenUsage usage;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;

    // Thread-safe. Throws Error(model_unavailable) when the backend cannot answer.
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// Deterministic scripted backend. Rules are tried in registration order; the
// first rule whose predicate accepts the request answers it, either from its
// queue (ScriptExhausted once empty) or from a generator function.
class MockClient : public ChatClient {
public:
    using Predicate = std::function<bool(const ChatRequest&)>;
    using Generator = std::function<std::string(const ChatRequest&)>;

    MockClient() = default;
    explicit MockClient(std::vector<std::string> responses) { script(std::move(responses)); }

    MockClient& script(std::vector<std::string> responses);
    MockClient& on(Predicate predicate, std::vector<std::string> responses);
    MockClient& on(Predicate predicate, Generator generator);

    ChatResponse complete(const ChatRequest& request) override;

    std::size_t call_count() const;
    // Requests are retained for inspection unless disabled (long batch runs).
    std::vector<ChatRequest> requests() const;
    void keep_requests(bool keep);

private:
    struct Rule {
        Predicate predicate;
        std::deque<std::string> queue;
        Generator generator;
    };

    mutable std::mutex mutex_;
    std::vector<Rule> rules_;
    std::vector<ChatRequest> log_;
    std::size_t calls_ = 0;
    bool keep_log_ = true;
};

MockClient::Predicate prompt_contains(std::string needle);

}  // namespace mobilegen
