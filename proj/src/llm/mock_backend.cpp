#include "recipemem/llm/mock_backend.hpp"

#include <cctype>
#include <fstream>

#include "recipemem/core/records.hpp"
#include "recipemem/core/text.hpp"

namespace recipemem::llm {
namespace {

// Byte offset just past the n-th whitespace-delimited token, or npos when the
// text has at most n tokens.
std::size_t end_of_token(const std::string& text, int n) {
  int count = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (++count == n) {
      std::size_t j = i;
      while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      return j < text.size() ? i : std::string::npos;
    }
  }
  return std::string::npos;
}

}  // namespace

std::string MockBackend::echo_text(const std::string& prompt) { return "RECIPE:" + stable_hash(prompt); }

bool MockBackend::rule_matches(const Rule& rule, const std::string& prompt, const std::string& model_id) {
  if (!rule.model_id.empty() && rule.model_id != model_id) return false;
  for (const auto& needle : rule.contains) {
    if (prompt.find(needle) == std::string::npos) return false;
  }
  return true;
}

void MockBackend::maybe_fail(const std::string& prompt) {
  for (auto& f : failures_) {
    if (f.remaining == 0) continue;
    if (!f.match.empty() && prompt.find(f.match) == std::string::npos) continue;
    if (f.remaining > 0) --f.remaining;
    if (f.kind == FailureKind::Transport) throw TransportError("mock: injected connection failure");
    throw ProtocolError("mock: injected malformed reply");
  }
}

Completion MockBackend::complete(const GenerationRequest& request) {
  std::string text;
  {
    std::lock_guard lock(mu_);
    ++completion_calls_;
    maybe_fail(request.prompt);
    if (auto it = completions_.find({request.model_id, request.prompt}); it != completions_.end()) {
      text = it->second;
    } else if (auto any = completions_.find({std::string(), request.prompt}); any != completions_.end()) {
      text = any->second;
    } else {
      bool matched = false;
      for (const auto& rule : completion_rules_) {
        if (rule_matches(rule, request.prompt, request.model_id)) {
          text = rule.value;
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (!echo_) throw ProtocolError("mock: no completion entry for prompt");
        text = echo_text(request.prompt);
      }
    }
  }
  const std::size_t cut = end_of_token(text, request.max_tokens);
  if (cut == std::string::npos) return {std::move(text), FinishReason::Stop};
  return {text.substr(0, cut), FinishReason::LengthLimit};
}

double MockBackend::score_continuation(const ScoreRequest& request) {
  std::lock_guard lock(mu_);
  ++score_calls_;
  if (!logprobs_) throw CapabilityError("mock: backend does not expose token log-probabilities");
  maybe_fail(request.prompt);
  for (const auto& model : {request.model_id, std::string()}) {
    if (auto it = scores_.find({model, request.prompt, request.continuation}); it != scores_.end()) {
      return it->second;
    }
  }
  for (const auto& rule : score_rules_) {
    if (rule.value == request.continuation && rule_matches(rule, request.prompt, request.model_id)) {
      return rule.logprob;
    }
  }
  const auto tokens = split_words(request.continuation);
  if (!tokens.empty() && !token_logprobs_.empty()) {
    double sum = 0.0;
    bool all_known = true;
    for (const auto& t : tokens) {
      auto it = token_logprobs_.find(t);
      if (it == token_logprobs_.end()) {
        all_known = false;
        break;
      }
      sum += it->second;
    }
    if (all_known) return sum;
  }
  if (hash_scores_) {
    const auto h = fnv1a64(request.model_id + '\x1f' + request.prompt + '\x1f' + request.continuation);
    return -1.0 - static_cast<double>(h % 10000) / 1000.0;
  }
  throw ProtocolError("mock: no score entry for continuation '" + request.continuation + "'");
}

void MockBackend::add_completion(std::string prompt, std::string text, std::string model_id) {
  std::lock_guard lock(mu_);
  completions_[{std::move(model_id), std::move(prompt)}] = std::move(text);
}

void MockBackend::add_completion_rule(std::vector<std::string> contains, std::string text, std::string model_id) {
  std::lock_guard lock(mu_);
  completion_rules_.push_back({std::move(contains), std::move(model_id), std::move(text), 0.0});
}

void MockBackend::add_score(std::string prompt, std::string continuation, double logprob, std::string model_id) {
  std::lock_guard lock(mu_);
  scores_[{std::move(model_id), std::move(prompt), std::move(continuation)}] = logprob;
}

void MockBackend::add_score_rule(std::vector<std::string> contains, std::string continuation, double logprob,
                                 std::string model_id) {
  std::lock_guard lock(mu_);
  score_rules_.push_back({std::move(contains), std::move(model_id), std::move(continuation), logprob});
}

void MockBackend::add_token_logprob(std::string token, double logprob) {
  std::lock_guard lock(mu_);
  token_logprobs_[std::move(token)] = logprob;
}

void MockBackend::set_echo(bool on) {
  std::lock_guard lock(mu_);
  echo_ = on;
}

void MockBackend::set_hash_scores(bool on) {
  std::lock_guard lock(mu_);
  hash_scores_ = on;
}

void MockBackend::set_logprobs_supported(bool on) {
  std::lock_guard lock(mu_);
  logprobs_ = on;
}

void MockBackend::inject_failure(FailureKind kind, int count, std::string match) {
  std::lock_guard lock(mu_);
  failures_.push_back({kind, count, std::move(match)});
}

int MockBackend::completion_calls() const {
  std::lock_guard lock(mu_);
  return completion_calls_;
}

int MockBackend::score_calls() const {
  std::lock_guard lock(mu_);
  return score_calls_;
}

void MockBackend::load_fixture(std::istream& in) {
  int lineno = 0;
  for (const Json& row : read_json_lines(in)) {
    ++lineno;
    try {
      const std::string type = row.at("type").get<std::string>();
      const std::string model = row.value("model_id", "");
      std::vector<std::string> contains;
      if (row.contains("contains")) {
        const auto& c = row.at("contains");
        contains = c.is_string() ? std::vector<std::string>{c.get<std::string>()}
                                 : c.get<std::vector<std::string>>();
      }
      if (type == "completion") {
        if (row.contains("prompt")) {
          add_completion(row.at("prompt").get<std::string>(), row.at("text").get<std::string>(), model);
        } else {
          add_completion_rule(std::move(contains), row.at("text").get<std::string>(), model);
        }
      } else if (type == "score") {
        const double lp = row.at("logprob").get<double>();
        if (row.contains("prompt")) {
          add_score(row.at("prompt").get<std::string>(), row.at("continuation").get<std::string>(), lp, model);
        } else {
          add_score_rule(std::move(contains), row.at("continuation").get<std::string>(), lp, model);
        }
      } else if (type == "token") {
        add_token_logprob(row.at("token").get<std::string>(), row.at("logprob").get<double>());
      } else if (type == "options") {
        if (row.contains("echo")) set_echo(row.at("echo").get<bool>());
        if (row.contains("hash_scores")) set_hash_scores(row.at("hash_scores").get<bool>());
        if (row.contains("logprobs")) set_logprobs_supported(row.at("logprobs").get<bool>());
      } else {
        throw FormatError("unknown mock fixture type '" + type + "'");
      }
    } catch (const Json::exception& e) {
      throw FormatError("mock fixture entry " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void MockBackend::load_fixture_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock fixture " + path);
  load_fixture(in);
}

}  // namespace recipemem::llm
