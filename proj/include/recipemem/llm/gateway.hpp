#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "recipemem/core/error.hpp"

namespace recipemem::llm {

struct GenerationRequest {
  std::string prompt;
  int max_tokens = 1024;
  double temperature = 0.7;  // unvalidated default; the sampling settings are not published
  std::optional<std::int64_t> seed;
  std::string model_id;
};

enum class FinishReason { Stop, LengthLimit };

struct Completion {
  std::string text;  // verbatim backend text, never trimmed
  FinishReason finish = FinishReason::Stop;
};

struct ScoreRequest {
  std::string prompt;
  std::string continuation;
  std::string model_id;
};

// Connection-level failure; safe to retry.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int attempts = 1) : Error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

// The backend answered with something we cannot interpret; never retried.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// The backend cannot do what was asked (e.g. no per-token log-probabilities).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual Completion complete(const GenerationRequest& request) = 0;
  // Sum of the continuation tokens' log-probabilities given the prompt.
  virtual double score_continuation(const ScoreRequest& request) = 0;
};

struct RetryPolicy {
  int retry_count = 2;
  int backoff_ms = 200;
};

// Thread-safe front end over a Backend: validates requests, retries transport
// failures, and caps the number of in-flight calls.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, RetryPolicy retry = {}, int max_concurrency = 4);

  Completion complete(const GenerationRequest& request) const;
  double score_continuation(const ScoreRequest& request) const;

  int max_concurrency() const;
  Backend& backend() const { return *backend_; }

 private:
  struct Limiter;
  std::shared_ptr<Backend> backend_;
  RetryPolicy retry_;
  std::shared_ptr<Limiter> limiter_;
};

struct GatewayConfig {
  std::string backend = "http";  // "http" or "mock"
  std::string endpoint_url;
  std::string api_key;  // literal, or "env:NAME" to read $NAME
  std::string model_id;
  int max_concurrency = 4;
  int retry_count = 2;
  int retry_backoff_ms = 200;
  int timeout_ms = 120000;
  std::string mock_fixture;  // path, backend == "mock"
};

std::string resolve_secret(const std::string& value);

// Builds the configured backend wrapped in a Gateway.
Gateway make_gateway(const GatewayConfig& config);

}  // namespace recipemem::llm
