#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "entail/proof_dsl.hpp"
#include "entail/proof_graph.hpp"
#include "entail/step_sources.hpp"

namespace entail {

enum class ScoreMix : std::uint8_t { Average, ProverOnly, VerifierOnly };

std::string to_string(ScoreMix mix);
ScoreMix score_mix_from_string(std::string const& s);

/// Step score from prover and verifier scores. Throws DomainError outside [0, 1].
double mix_scores(double p_score, double v_score, ScoreMix mode);

struct SearchConfig {
    std::size_t num_candidates = 10;
    std::size_t max_iterations = 50;
    double min_improvement = 1e-6;
    ScoreMix score_mix = ScoreMix::Average;
    /// Stop after this many consecutive iterations without any graph update.
    std::size_t patience = 5;
    std::size_t max_sample_retries = 32;
    std::uint64_t seed = 0;
    /// When false only the greedy proof is produced.
    bool search = true;
    /// One JSON record per iteration when set.
    std::function<void(nlohmann::json const&)> trace;

    void validate() const;
};

struct GreedyProof {
    LinearProof proof;
    std::vector<double> prover_scores;  // one per step
    bool complete = false;              // concluded the hypothesis
};

struct SearchResult {
    std::optional<ProofTree> proof;
    double proof_score = 0.0;
    std::size_t iterations = 0;
    ProofGraph graph;
    /// Set when a prover or verifier failure aborted the search; the rest of
    /// the result reflects the best graph found before the failure.
    std::optional<std::string> error;
    bool bridge_failure = false;
};

/// Commits the prover's best well-formed step until the hypothesis is
/// concluded, no well-formed step remains, or 2|C| steps were taken.
GreedyProof generate_greedy(StepSource& prover,
                            std::string const& hypothesis,
                            std::vector<std::string> const& context,
                            std::size_t num_candidates = 10);

/// Greedy initialization followed by the sample / generate / verify / update
/// loop; returns the best proof of the hypothesis in the final graph.
SearchResult run_search(StepSource& prover,
                        StepScorer& verifier,
                        std::string const& hypothesis,
                        std::vector<std::string> const& context,
                        SearchConfig const& config);

}  // namespace entail
