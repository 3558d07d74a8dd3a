#include "mobilegen/http_client.hpp"

#include "mobilegen/error.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace mobilegen {

namespace {

std::string env_or_empty(const char* name)
{
    const char* v = std::getenv(name);
    return v == nullptr ? std::string{} : std::string{v};
}

struct ReleaseOnExit {
    std::counting_semaphore<1024>& sem;
    ~ReleaseOnExit() { sem.release(); }
};

}  // namespace

HttpClientConfig HttpClientConfig::from_env()
{
    HttpClientConfig cfg;
    cfg.endpoint = env_or_empty("MOBILEGEN_MODEL_ENDPOINT");
    cfg.api_key = env_or_empty("MOBILEGEN_MODEL_KEY");
    cfg.model = env_or_empty("MOBILEGEN_MODEL_NAME");
    return cfg;
}

EndpointUrl parse_endpoint(const std::string& endpoint)
{
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::invalid_config, "model endpoint must start with http:// or https://: " + endpoint);
    }
    const auto path_start = endpoint.find('/', scheme_end + 3);
    EndpointUrl url;
    url.origin = endpoint.substr(0, path_start);
    url.path = path_start == std::string::npos ? std::string{} : endpoint.substr(path_start);
    while (!url.path.empty() && url.path.back() == '/') {
        url.path.pop_back();
    }
    constexpr std::string_view suffix = "/chat/completions";
    if (url.path.empty()) {
        url.path = "/v1";
    }
    if (url.path.size() < suffix.size() || url.path.compare(url.path.size() - suffix.size(), suffix.size(), suffix) != 0) {
        url.path += suffix;
    }
    return url;
}

std::string base64_encode(std::string_view bytes)
{
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

nlohmann::json build_wire_request(const ChatRequest& request, const std::string& model)
{
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : request.messages) {
        nlohmann::json content = nlohmann::json::array();
        for (const auto& part : m.parts) {
            if (const auto* text = std::get_if<std::string>(&part)) {
                content.push_back({{"type", "text"}, {"text", *text}});
            } else {
                const auto& image = std::get<ImagePayload>(part);
                content.push_back(
                    {{"type", "image_url"},
                     {"image_url", {{"url", "data:" + image.mime_type + ";base64," + base64_encode(image.bytes)}}}});
            }
        }
        messages.push_back({{"role", std::string(to_string(m.role))}, {"content", content}});
    }
    nlohmann::json body = {
        {"model", model},
        {"messages", messages},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    if (request.seed) {
        body["seed"] = *request.seed;
    }
    return body;
}

ChatResponse parse_wire_response(const std::string& body)
{
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::model_unavailable, "response body is not JSON");
    }
    try {
        const auto& content = j.at("choices").at(0).at("message").at("content");
        ChatResponse r;
        if (content.is_string()) {
            r.text = content.get<std::string>();
        } else if (content.is_array()) {
            for (const auto& part : content) {
                if (part.contains("text")) {
                    r.text += part.at("text").get<std::string>();
                }
            }
        } else if (!content.is_null()) {
            throw Error(ErrorCode::model_unavailable, "unsupported content type in response");
        }
        if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
            r.usage.prompt_tokens = usage->value("prompt_tokens", 0);
            r.usage.completion_tokens = usage->value("completion_tokens", 0);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::model_unavailable, std::string("malformed completion response: ") + e.what());
    }
}

HttpChatClient::HttpChatClient(HttpClientConfig cfg)
    : cfg_(std::move(cfg)), url_(parse_endpoint(cfg_.endpoint)), in_flight_(std::clamp(cfg_.max_in_flight, 1, 1024))
{
}

HttpChatClient::~HttpChatClient() = default;

ChatResponse HttpChatClient::complete(const ChatRequest& request)
{
    request.validate();
    const std::string body = build_wire_request(request, cfg_.model).dump();

    in_flight_.acquire();
    ReleaseOnExit release{in_flight_};

    httplib::Client client(url_.origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + cfg_.api_key);
    }

    auto backoff = cfg_.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff = std::min(backoff * 2, cfg_.max_backoff);
        }
        auto result = client.Post(url_.path, headers, body, "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        const int status = result->status;
        if (status >= 200 && status < 300) {
            return parse_wire_response(result->body);
        }
        if (status >= 400 && status < 500) {
            throw Error(ErrorCode::model_unavailable,
                        "request rejected with HTTP " + std::to_string(status) + ": " + result->body.substr(0, 200));
        }
        last_error = "HTTP " + std::to_string(status);
    }
    throw Error(ErrorCode::model_unavailable,
                "gave up after " + std::to_string(cfg_.max_retries + 1) + " attempts (" + last_error + ")");
}

}  // namespace mobilegen
