#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "acbo/dag.hpp"
#include "acbo/rng.hpp"

namespace acbo {

enum class OracleMode { Simulated, Llm, Replay };

struct OracleConfig {
    double eta = 0.1;  // per-vote error probability, must stay below 1/2
    int votes_m = 3;   // odd majority-vote count
    OracleMode mode = OracleMode::Simulated;

    void validate() const;
};

struct OracleQuery {
    std::string query_id;
    std::string premise_text;
    std::vector<std::string> var_names;
    Intervention intervention;
    int observed = 0;
    // Undefined in the loop's interface; carried as prompt context only.
    std::optional<int> context_target;
};

struct OracleResponse {
    int answer = 0;          // majority of votes
    std::vector<int> votes;  // by vote index
    std::optional<double> latency_ms;
};

// Probability that the majority of m independent votes, each wrong with
// probability p, is wrong: sum_{k > m/2} C(m,k) p^k (1-p)^(m-k).
double effective_error(double per_vote_error, int votes_m);

// Deterministic interventional prompt: premise paragraph + the fixed question.
std::string render_intervention_prompt(const OracleQuery& q);

// Case/whitespace-insensitive first-token yes/no rule; nullopt if unparseable.
std::optional<int> parse_yes_no(const std::string& reply);

std::string sha256_hex(const std::string& data);

// One transcript line per query; replay reconstructs responses from these.
struct TranscriptRecord {
    std::string query_id;
    std::string prompt_sha256;
    std::vector<int> votes;
    int answer = 0;
    std::string model;
    std::int64_t timestamp = 0;

    std::string to_jsonl() const;
    static TranscriptRecord from_jsonl(const std::string& line, std::size_t line_no = 0);
};

std::vector<TranscriptRecord> read_transcript_file(const std::string& path);
void write_transcript_file(const std::string& path, const std::vector<TranscriptRecord>& records);

class InterventionOracle {
  public:
    virtual ~InterventionOracle() = default;
    virtual OracleResponse query(const OracleQuery& q) = 0;

    const std::vector<TranscriptRecord>& transcript() const { return transcript_; }

  protected:
    void record(const OracleQuery& q, const OracleResponse& r, const std::string& model);

  private:
    std::vector<TranscriptRecord> transcript_;
};

// Answers from the ground-truth graph, each vote flipped independently with
// probability eta. Deterministic per seed; queries within a run are sequential.
class SimulatedOracle final : public InterventionOracle {
  public:
    SimulatedOracle(Dag truth, OracleConfig cfg, std::uint64_t rng_seed);
    OracleResponse query(const OracleQuery& q) override;

  private:
    Dag truth_;
    OracleConfig cfg_;
    Rng rng_;
};

// Replays a recorded transcript in order, verifying prompt hashes.
class ReplayOracle final : public InterventionOracle {
  public:
    explicit ReplayOracle(std::vector<TranscriptRecord> records);
    OracleResponse query(const OracleQuery& q) override;

  private:
    std::vector<TranscriptRecord> records_;
    std::size_t next_ = 0;
};

struct LlmEndpointConfig {
    std::string base_url = "http://127.0.0.1:8080";
    std::string path = "/v1/chat/completions";
    std::string model = "oracle-model";
    double temperature = 0.0;
    int max_tokens = 8;
    int timeout_ms = 30000;
    int max_retries = 2;               // transport retries per vote
    std::string api_key_env = "ACBO_API_KEY";
};

// One chat-completion POST per vote. An unparseable reply gets one retry and
// then counts as the prior-neutral default 0; transport failure after retries
// raises OracleError.
class LlmOracle final : public InterventionOracle {
  public:
    LlmOracle(OracleConfig cfg, LlmEndpointConfig endpoint);
    OracleResponse query(const OracleQuery& q) override;

    // Exposed for tests: extract a vote from one raw completion body.
    static std::optional<int> parse_completion_body(const std::string& body);

  private:
    std::string call_once(const std::string& prompt);

    OracleConfig cfg_;
    LlmEndpointConfig endpoint_;
};

}  // namespace acbo
