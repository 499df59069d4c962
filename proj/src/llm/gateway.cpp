#include "recipemem/llm/gateway.hpp"

#include <cstdlib>
#include <semaphore>
#include <thread>

#include "recipemem/llm/http_backend.hpp"
#include "recipemem/llm/mock_backend.hpp"

namespace recipemem::llm {

struct Gateway::Limiter {
  explicit Limiter(int n) : slots(n), capacity(n) {}
  std::counting_semaphore<> slots;
  int capacity;
};

namespace {

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

template <typename F>
auto with_retry(const RetryPolicy& policy, F&& call) {
  for (int attempt = 1;; ++attempt) {
    try {
      return call();
    } catch (const TransportError& e) {
      if (attempt > policy.retry_count) {
        throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempt) + " attempts)", attempt);
      }
      if (policy.backoff_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(policy.backoff_ms * attempt));
      }
    }
  }
}

}  // namespace

Gateway::Gateway(std::shared_ptr<Backend> backend, RetryPolicy retry, int max_concurrency)
    : backend_(std::move(backend)), retry_(retry) {
  if (!backend_) throw PreconditionError("gateway needs a backend");
  if (max_concurrency < 1) throw PreconditionError("max_concurrency must be >= 1");
  if (retry_.retry_count < 0) throw PreconditionError("retry_count must be >= 0");
  limiter_ = std::make_shared<Limiter>(max_concurrency);
}

int Gateway::max_concurrency() const { return limiter_->capacity; }

Completion Gateway::complete(const GenerationRequest& request) const {
  if (request.max_tokens < 1) throw PreconditionError("max_tokens must be >= 1");
  if (!(request.temperature >= 0.0)) throw PreconditionError("temperature must be >= 0");
  return with_retry(retry_, [&] {
    SlotGuard slot(limiter_->slots);
    return backend_->complete(request);
  });
}

double Gateway::score_continuation(const ScoreRequest& request) const {
  if (request.continuation.empty()) throw PreconditionError("continuation must be non-empty");
  const double score = with_retry(retry_, [&] {
    SlotGuard slot(limiter_->slots);
    return backend_->score_continuation(request);
  });
  if (!(score <= 0.0)) throw ProtocolError("backend returned a positive log-probability");
  return score;
}

std::string resolve_secret(const std::string& value) {
  if (value.rfind("env:", 0) != 0) return value;
  const std::string name = value.substr(4);
  const char* v = std::getenv(name.c_str());
  if (!v) throw ConfigError("environment variable " + name + " is not set");
  return v;
}

Gateway make_gateway(const GatewayConfig& config) {
  std::shared_ptr<Backend> backend;
  if (config.backend == "mock") {
    auto mock = std::make_shared<MockBackend>();
    if (!config.mock_fixture.empty()) mock->load_fixture_file(config.mock_fixture);
    backend = std::move(mock);
  } else if (config.backend == "http") {
    HttpBackendOptions opts;
    opts.endpoint_url = config.endpoint_url;
    opts.api_key = resolve_secret(config.api_key);
    opts.timeout_ms = config.timeout_ms;
    backend = std::make_shared<HttpBackend>(opts);
  } else {
    throw ConfigError("unknown gateway backend '" + config.backend + "'");
  }
  return Gateway(std::move(backend), {config.retry_count, config.retry_backoff_ms}, config.max_concurrency);
}

}  // namespace recipemem::llm
