#include "acbo/oracle.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>

#include <openssl/evp.h>

#include "acbo/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace acbo {

void OracleConfig::validate() const {
    if (!(eta >= 0.0 && eta < 0.5)) {
        throw ConfigError("oracle eta must lie in [0, 0.5); a majority-correct oracle is required");
    }
    if (votes_m < 1 || votes_m % 2 == 0) {
        throw ConfigError("votes_m must be a positive odd integer");
    }
}

double effective_error(double per_vote_error, int votes_m) {
    if (per_vote_error < 0.0 || per_vote_error > 1.0) {
        throw InputError("per-vote error must be a probability");
    }
    if (votes_m < 1 || votes_m % 2 == 0) throw InputError("votes_m must be odd");
    const double p = per_vote_error;
    double total = 0.0;
    for (int k = votes_m / 2 + 1; k <= votes_m; ++k) {
        double term = 1.0;
        for (int i = 0; i < k; ++i) term *= static_cast<double>(votes_m - i) / (i + 1);
        term *= std::pow(p, k) * std::pow(1.0 - p, votes_m - k);
        total += term;
    }
    return total;
}

std::string render_intervention_prompt(const OracleQuery& q) {
    if (q.observed == q.intervention.target) {
        throw InputError("observed variable must differ from the intervention target");
    }
    const auto& vn = q.var_names;
    auto name_of = [&](int i) {
        if (i < 0 || i >= static_cast<int>(vn.size())) {
            throw InputError("query variable index out of range");
        }
        return vn[i];
    };
    std::string prompt = q.premise_text;
    if (!prompt.empty()) prompt += " ";
    prompt += "Suppose we intervene and set " + name_of(q.intervention.target) +
              " to a fixed value, severing all of its incoming influences. "
              "Question: Would the distribution of " + name_of(q.observed) +
              " change as a result? Answer strictly 'yes' or 'no'.";
    return prompt;
}

std::optional<int> parse_yes_no(const std::string& reply) {
    std::string first;
    for (char c : reply) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (first.empty()) continue;
            break;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            first += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!first.empty()) {
            break;
        }
    }
    if (first == "yes") return 1;
    if (first == "no") return 0;
    return std::nullopt;
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string TranscriptRecord::to_jsonl() const {
    nlohmann::json j;
    j["query_id"] = query_id;
    j["prompt_sha256"] = prompt_sha256;
    j["votes"] = votes;
    j["answer"] = answer;
    j["model"] = model;
    j["timestamp"] = timestamp;
    return j.dump();
}

TranscriptRecord TranscriptRecord::from_jsonl(const std::string& line, std::size_t line_no) {
    TranscriptRecord r;
    try {
        const auto j = nlohmann::json::parse(line);
        r.query_id = j.at("query_id").get<std::string>();
        r.prompt_sha256 = j.at("prompt_sha256").get<std::string>();
        r.votes = j.at("votes").get<std::vector<int>>();
        r.answer = j.at("answer").get<int>();
        r.model = j.at("model").get<std::string>();
        r.timestamp = j.at("timestamp").get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad transcript line: ") + e.what(), line_no);
    }
    return r;
}

std::vector<TranscriptRecord> read_transcript_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open transcript file: " + path);
    std::vector<TranscriptRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        out.push_back(TranscriptRecord::from_jsonl(line, n));
    }
    return out;
}

void write_transcript_file(const std::string& path, const std::vector<TranscriptRecord>& records) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write transcript file: " + path);
    for (const auto& r : records) out << r.to_jsonl() << "\n";
}

void InterventionOracle::record(const OracleQuery& q, const OracleResponse& r,
                                const std::string& model) {
    TranscriptRecord rec;
    rec.query_id = q.query_id;
    rec.prompt_sha256 = sha256_hex(render_intervention_prompt(q));
    rec.votes = r.votes;
    rec.answer = r.answer;
    rec.model = model;
    rec.timestamp = std::chrono::duration_cast<std::chrono::seconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();
    transcript_.push_back(std::move(rec));
}

SimulatedOracle::SimulatedOracle(Dag truth, OracleConfig cfg, std::uint64_t rng_seed)
    : truth_(std::move(truth)), cfg_(cfg), rng_(rng_seed) {
    cfg_.validate();
    if (cfg_.mode != OracleMode::Simulated) {
        throw ConfigError("SimulatedOracle requires mode=simulated");
    }
}

OracleResponse SimulatedOracle::query(const OracleQuery& q) {
    if (q.observed == q.intervention.target) {
        throw InputError("observed variable must differ from the intervention target");
    }
    const int truth_bit = r_hat(truth_, VarPair{q.intervention.target, q.observed});
    OracleResponse r;
    r.votes.reserve(cfg_.votes_m);
    int ones = 0;
    for (int v = 0; v < cfg_.votes_m; ++v) {
        int bit = truth_bit;
        if (rng_.bernoulli(cfg_.eta)) bit ^= 1;
        r.votes.push_back(bit);
        ones += bit;
    }
    r.answer = (2 * ones > cfg_.votes_m) ? 1 : 0;
    record(q, r, "simulated");
    return r;
}

ReplayOracle::ReplayOracle(std::vector<TranscriptRecord> records)
    : records_(std::move(records)) {}

OracleResponse ReplayOracle::query(const OracleQuery& q) {
    if (next_ >= records_.size()) {
        throw OracleError("transcript incomplete: no record for query " + q.query_id);
    }
    const auto& rec = records_[next_++];
    const std::string expect = sha256_hex(render_intervention_prompt(q));
    if (rec.prompt_sha256 != expect) {
        throw OracleError("transcript mismatch at query " + q.query_id +
                          ": prompt hash differs");
    }
    OracleResponse r;
    r.answer = rec.answer;
    r.votes = rec.votes;
    record(q, r, rec.model);
    return r;
}

LlmOracle::LlmOracle(OracleConfig cfg, LlmEndpointConfig endpoint)
    : cfg_(cfg), endpoint_(std::move(endpoint)) {
    cfg_.validate();
    if (cfg_.mode != OracleMode::Llm) throw ConfigError("LlmOracle requires mode=llm");
}

std::optional<int> LlmOracle::parse_completion_body(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        const auto& choices = j.at("choices");
        if (choices.empty()) return std::nullopt;
        const std::string content = choices[0].at("message").at("content").get<std::string>();
        return parse_yes_no(content);
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

std::string LlmOracle::call_once(const std::string& prompt) {
    httplib::Client client(endpoint_.base_url);
    client.set_connection_timeout(0, endpoint_.timeout_ms * 1000);
    client.set_read_timeout(endpoint_.timeout_ms / 1000, (endpoint_.timeout_ms % 1000) * 1000);

    nlohmann::json req;
    req["model"] = endpoint_.model;
    req["messages"] = {{{"role", "user"}, {"content", prompt}}};
    req["temperature"] = endpoint_.temperature;
    req["max_tokens"] = endpoint_.max_tokens;

    httplib::Headers headers;
    if (const char* key = std::getenv(endpoint_.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        auto res = client.Post(endpoint_.path, headers, req.dump(), "application/json");
        if (res && res->status == 200) return res->body;
    }
    throw OracleError("oracle unavailable: " + endpoint_.base_url + endpoint_.path);
}

OracleResponse LlmOracle::query(const OracleQuery& q) {
    const std::string prompt = render_intervention_prompt(q);
    const auto started = std::chrono::steady_clock::now();

    OracleResponse r;
    r.votes.reserve(cfg_.votes_m);
    int ones = 0;
    for (int v = 0; v < cfg_.votes_m; ++v) {
        std::optional<int> bit = parse_completion_body(call_once(prompt));
        if (!bit) bit = parse_completion_body(call_once(prompt));  // one retry
        const int vote = bit.value_or(0);  // prior-neutral default, kept in the log
        r.votes.push_back(vote);
        ones += vote;
    }
    r.answer = (2 * ones > cfg_.votes_m) ? 1 : 0;
    r.latency_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    record(q, r, endpoint_.model);
    return r;
}

}  // namespace acbo
