#pragma once

// JSON wire protocol to external step sources:
//
//   {"op":"generate","hypothesis":str,"context":[str],"partial_proof":str,"n":int}
//     -> {"candidates":[{"step":str,"score":float}]}
//   {"op":"score","premises":[str],"conclusion":str}
//     -> {"score":float}
//
// Transport is newline-delimited JSON over a child process's stdio, or an
// HTTP POST when the endpoint starts with "http://". A response carrying
// {"error":str} is a protocol error. All floats must be finite and in [0, 1].

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "entail/step_sources.hpp"

namespace entail {

class BridgeChannel {
  public:
    virtual ~BridgeChannel() = default;
    virtual nlohmann::json request(nlohmann::json const& message) = 0;
    /// Round-trip time of the most recent request.
    double last_latency_ms() const { return m_last_latency_ms; }

  protected:
    double m_last_latency_ms = 0.0;
};

/// Spawns `/bin/sh -c command` and talks to it line by line. Requests on one
/// channel are serialized.
class ProcessChannel : public BridgeChannel {
  public:
    ProcessChannel(std::string command, std::chrono::milliseconds timeout);
    ~ProcessChannel() override;
    ProcessChannel(ProcessChannel const&) = delete;
    ProcessChannel& operator=(ProcessChannel const&) = delete;

    nlohmann::json request(nlohmann::json const& message) override;
    /// Sends a raw line and returns the raw reply line (conformance checks).
    std::string request_line(std::string const& line);

  private:
    void shutdown();

    std::string m_command;
    std::chrono::milliseconds m_timeout;
    int m_pid = -1;
    int m_to_child = -1;
    int m_from_child = -1;
    bool m_broken = false;
    std::string m_buffer;
    std::mutex m_mutex;
};

class HttpChannel : public BridgeChannel {
  public:
    HttpChannel(std::string url, std::chrono::milliseconds timeout);
    nlohmann::json request(nlohmann::json const& message) override;
    std::string request_raw(std::string const& body);

  private:
    std::string m_host;
    std::string m_path;
    std::chrono::milliseconds m_timeout;
    std::mutex m_mutex;
};

std::shared_ptr<BridgeChannel> open_channel(std::string const& endpoint, std::chrono::milliseconds timeout);

/// Throws BridgeProtocolError unless `v` is a finite number in [0, 1].
double checked_score(nlohmann::json const& v);

class ExternalSource : public StepSource {
  public:
    explicit ExternalSource(std::shared_ptr<BridgeChannel> channel);
    std::vector<Candidate> generate(std::string const& hypothesis,
                                    std::vector<std::string> const& context,
                                    LinearProof const& partial,
                                    std::size_t n) override;

  private:
    std::shared_ptr<BridgeChannel> m_channel;
};

/// Premises are shuffled with a seeded generator before being sent.
class ExternalScorer : public StepScorer {
  public:
    ExternalScorer(std::shared_ptr<BridgeChannel> channel, std::uint64_t seed);
    double score(std::vector<std::string> const& premises, std::string const& conclusion) override;
    double score_hypothesis_step(std::vector<std::string> const& premises,
                                 std::string const& hypothesis) override;

  private:
    double send(std::vector<std::string> premises, std::string const& conclusion, bool hypothesis_role);

    std::shared_ptr<BridgeChannel> m_channel;
    std::mt19937_64 m_rng;
    std::mutex m_mutex;
};

/// Result of probing a bridge with valid and malformed requests.
struct ConformanceReport {
    struct Check {
        std::string name;
        bool passed = false;
        std::string detail;
    };
    std::vector<Check> checks;
    bool passed() const;
};

/// Fuzz client for bridge implementations: valid requests must produce
/// in-range responses; malformed ones must produce {"error":...} without
/// killing the bridge. `fuzz_cases` extra random malformed lines are sent.
ConformanceReport check_bridge(std::string const& endpoint,
                               std::chrono::milliseconds timeout,
                               std::size_t fuzz_cases,
                               std::uint64_t seed);

}  // namespace entail
