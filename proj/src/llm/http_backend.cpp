#include "recipemem/llm/http_backend.hpp"

#include <httplib.h>

#include <json.hpp>

namespace recipemem::llm {
namespace {

using nlohmann::json;

const json& first_choice(const json& reply) {
  if (!reply.is_object() || !reply.contains("choices") || !reply["choices"].is_array() ||
      reply["choices"].empty()) {
    throw ProtocolError("completions reply has no choices");
  }
  return reply["choices"][0];
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  const std::string& url = options_.endpoint_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint_url needs a scheme: '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  std::string base = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!base.empty() && base.back() == '/') base.pop_back();
  path_ = base + "/completions";
}

std::string HttpBackend::post(const std::string& body) {
  httplib::Client client(origin_);
  const auto timeout = std::chrono::milliseconds(options_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);
  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) throw TransportError("POST " + origin_ + path_ + ": " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw TransportError("POST " + origin_ + path_ + ": HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw ProtocolError("POST " + origin_ + path_ + ": HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  return res->body;
}

Completion HttpBackend::complete(const GenerationRequest& request) {
  json body = {{"model", request.model_id},
               {"prompt", request.prompt},
               {"max_tokens", request.max_tokens},
               {"temperature", request.temperature}};
  if (request.seed) body["seed"] = *request.seed;
  json reply;
  try {
    reply = json::parse(post(body.dump()));
    const json& choice = first_choice(reply);
    Completion out;
    out.text = choice.at("text").get<std::string>();
    const auto finish = choice.value("finish_reason", std::string("stop"));
    out.finish = finish == "length" ? FinishReason::LengthLimit : FinishReason::Stop;
    return out;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed completions reply: ") + e.what());
  }
}

double HttpBackend::score_continuation(const ScoreRequest& request) {
  json body = {{"model", request.model_id},
               {"prompt", request.prompt + request.continuation},
               {"max_tokens", 0},
               {"temperature", 0.0},
               {"echo", true},
               {"logprobs", 1}};
  try {
    const json reply = json::parse(post(body.dump()));
    const json& choice = first_choice(reply);
    if (!choice.contains("logprobs") || choice["logprobs"].is_null()) {
      throw CapabilityError("backend returned no log-probabilities for model " + request.model_id);
    }
    const json& lp = choice["logprobs"];
    const auto& offsets = lp.at("text_offset");
    const auto& values = lp.at("token_logprobs");
    if (offsets.size() != values.size()) throw ProtocolError("logprobs arrays differ in length");
    const auto prompt_len = request.prompt.size();
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (offsets[i].get<std::size_t>() < prompt_len) continue;
      if (values[i].is_null()) throw ProtocolError("null log-probability inside the continuation");
      sum += values[i].get<double>();
      ++counted;
    }
    if (counted == 0) throw ProtocolError("no continuation tokens in the echoed prompt");
    return sum;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed completions reply: ") + e.what());
  }
}

}  // namespace recipemem::llm
