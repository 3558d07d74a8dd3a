#pragma once

#include "mobilegen/model_client.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

namespace mobilegen {

struct HttpClientConfig {
    // Either a base URL ("http://host:8000/v1") or the full chat-completions URL.
    std::string endpoint;
    std::string api_key;
    std::string model;
    std::chrono::milliseconds timeout{60'000};
    int max_retries = 4;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{8'000};
    int max_in_flight = 8;

    // MOBILEGEN_MODEL_ENDPOINT, MOBILEGEN_MODEL_KEY, MOBILEGEN_MODEL_NAME.
    static HttpClientConfig from_env();
};

struct EndpointUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // always ends in /chat/completions
};

EndpointUrl parse_endpoint(const std::string& endpoint);

// OpenAI-compatible request body; images become base64 data URLs.
nlohmann::json build_wire_request(const ChatRequest& request, const std::string& model);

// Reads choices[0].message.content (string or list of text parts) and usage.
ChatResponse parse_wire_response(const std::string& body);

std::string base64_encode(std::string_view bytes);

class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(HttpClientConfig cfg);
    ~HttpChatClient() override;

    // Retries connection failures, timeouts and 5xx with exponential backoff;
    // 4xx rejections fail immediately.
    ChatResponse complete(const ChatRequest& request) override;

private:
    HttpClientConfig cfg_;
    EndpointUrl url_;
    std::counting_semaphore<1024> in_flight_;
};

}  // namespace mobilegen
