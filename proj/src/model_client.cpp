#include "mobilegen/model_client.hpp"

#include "mobilegen/error.hpp"

namespace mobilegen {

std::string_view to_string(Role role) noexcept
{
    switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    }
    return "user";
}

std::string ChatRequest::text() const
{
    std::string out;
    for (const auto& m : messages) {
        for (const auto& part : m.parts) {
            if (const auto* s = std::get_if<std::string>(&part)) {
                if (!out.empty()) {
                    out.push_back('\n');
                }
                out += *s;
            }
        }
    }
    return out;
}

std::size_t ChatRequest::image_count() const
{
    std::size_t n = 0;
    for (const auto& m : messages) {
        for (const auto& part : m.parts) {
            n += std::holds_alternative<ImagePayload>(part) ? 1 : 0;
        }
    }
    return n;
}

void ChatRequest::validate() const
{
    if (messages.empty()) {
        throw Error(ErrorCode::invalid_argument, "chat request needs at least one message");
    }
    if (!(temperature >= 0.0)) {
        throw Error(ErrorCode::invalid_argument, "temperature must be non-negative");
    }
    if (max_tokens <= 0) {
        throw Error(ErrorCode::invalid_argument, "max_tokens must be positive");
    }
}

MockClient& MockClient::script(std::vector<std::string> responses)
{
    return on([](const ChatRequest&) { return true; }, std::move(responses));
}

MockClient& MockClient::on(Predicate predicate, std::vector<std::string> responses)
{
    std::lock_guard lock(mutex_);
    rules_.push_back(Rule{std::move(predicate), std::deque<std::string>(responses.begin(), responses.end()), {}});
    return *this;
}

MockClient& MockClient::on(Predicate predicate, Generator generator)
{
    std::lock_guard lock(mutex_);
    rules_.push_back(Rule{std::move(predicate), {}, std::move(generator)});
    return *this;
}

ChatResponse MockClient::complete(const ChatRequest& request)
{
    request.validate();
    Generator generator;
    {
        std::lock_guard lock(mutex_);
        ++calls_;
        if (keep_log_) {
            log_.push_back(request);
        }
        Rule* match = nullptr;
        for (auto& rule : rules_) {
            if (rule.predicate(request)) {
                match = &rule;
                break;
            }
        }
        if (match == nullptr) {
            throw Error(ErrorCode::script_exhausted, "no scripted rule accepts the request");
        }
        if (!match->generator) {
            if (match->queue.empty()) {
                throw Error(ErrorCode::script_exhausted, "scripted responses used up");
            }
            ChatResponse response{std::move(match->queue.front()), {}};
            match->queue.pop_front();
            return response;
        }
        generator = match->generator;
    }
    // Generators are pure functions of the request; run them outside the lock.
    return ChatResponse{generator(request), {}};
}

std::size_t MockClient::call_count() const
{
    std::lock_guard lock(mutex_);
    return calls_;
}

void MockClient::keep_requests(bool keep)
{
    std::lock_guard lock(mutex_);
    keep_log_ = keep;
    if (!keep) {
        log_.clear();
    }
}

std::vector<ChatRequest> MockClient::requests() const
{
    std::lock_guard lock(mutex_);
    return log_;
}

MockClient::Predicate prompt_contains(std::string needle)
{
    return [needle = std::move(needle)](const ChatRequest& r) { return r.text().find(needle) != std::string::npos; };
}

}  // namespace mobilegen
