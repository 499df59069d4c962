#pragma once

#include <iosfwd>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "recipemem/llm/gateway.hpp"

namespace recipemem::llm {

// Deterministic, table-driven backend used by every pipeline test.
//
// Completions are resolved in this order: exact (model, prompt) entry, first
// matching substring rule, then echo mode ("RECIPE:" + prompt hash). Scores:
// exact (prompt, continuation) entry, first matching rule, per-token table
// (whitespace tokens, summed), then hashed pseudo-scores when enabled.
// Tokens for max_tokens truncation are whitespace-separated words.
//
// Fixture files are JSON Lines; each line has a "type":
//   {"type":"completion","prompt":"...","text":"...","model_id":"..."}
//   {"type":"completion","contains":["a","b"],"text":"..."}
//   {"type":"score","prompt":"...","continuation":" x","logprob":-1.5}
//   {"type":"score","contains":["..."],"continuation":" x","logprob":-1.5}
//   {"type":"token","token":"x","logprob":-0.5}
//   {"type":"options","echo":true,"hash_scores":true,"logprobs":true}
class MockBackend : public Backend {
 public:
  enum class FailureKind { Transport, Protocol };

  Completion complete(const GenerationRequest& request) override;
  double score_continuation(const ScoreRequest& request) override;

  void add_completion(std::string prompt, std::string text, std::string model_id = {});
  void add_completion_rule(std::vector<std::string> contains, std::string text, std::string model_id = {});
  void add_score(std::string prompt, std::string continuation, double logprob, std::string model_id = {});
  void add_score_rule(std::vector<std::string> contains, std::string continuation, double logprob,
                      std::string model_id = {});
  void add_token_logprob(std::string token, double logprob);

  void set_echo(bool on);
  void set_hash_scores(bool on);
  // false makes score_continuation raise CapabilityError, like a backend
  // without per-token log-probabilities.
  void set_logprobs_supported(bool on);

  // The next `count` calls whose prompt contains `match` fail with `kind`;
  // count < 0 fails every matching call.
  void inject_failure(FailureKind kind, int count, std::string match = {});

  void load_fixture(std::istream& in);
  void load_fixture_file(const std::string& path);

  int completion_calls() const;
  int score_calls() const;

  static std::string echo_text(const std::string& prompt);

 private:
  struct Rule {
    std::vector<std::string> contains;
    std::string model_id;
    std::string value;
    double logprob = 0.0;
  };
  struct Failure {
    FailureKind kind;
    int remaining;
    std::string match;
  };

  void maybe_fail(const std::string& prompt);
  static bool rule_matches(const Rule& rule, const std::string& prompt, const std::string& model_id);

  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, std::string> completions_;  // (model, prompt)
  std::vector<Rule> completion_rules_;
  std::map<std::tuple<std::string, std::string, std::string>, double> scores_;  // (model, prompt, cont)
  std::vector<Rule> score_rules_;  // value = continuation
  std::map<std::string, double> token_logprobs_;
  std::vector<Failure> failures_;
  bool echo_ = true;
  bool hash_scores_ = false;
  bool logprobs_ = true;
  int completion_calls_ = 0;
  int score_calls_ = 0;
};

}  // namespace recipemem::llm
