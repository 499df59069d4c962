#pragma once

#include <string>

#include "recipemem/llm/gateway.hpp"

namespace recipemem::llm {

struct HttpBackendOptions {
  // Base URL of a completions-style API, e.g. "http://localhost:8000/v1";
  // requests go to <endpoint_url>/completions.
  std::string endpoint_url;
  std::string api_key;
  int timeout_ms = 120000;
};

// Talks to an OpenAI-compatible /completions endpoint (vLLM, TGI, llama.cpp
// server and similar).
//
// Scoring uses the echo trick: the prompt and continuation are sent together
// with max_tokens=0, echo=true, logprobs=1, and the token log-probabilities
// whose text offset lies at or beyond the prompt length are summed.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options);

  Completion complete(const GenerationRequest& request) override;
  double score_continuation(const ScoreRequest& request) override;

 private:
  std::string post(const std::string& body);

  HttpBackendOptions options_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // "/v1/completions"
};

}  // namespace recipemem::llm
