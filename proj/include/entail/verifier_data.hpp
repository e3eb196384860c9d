#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "entail/bm25.hpp"
#include "entail/proof_dsl.hpp"
#include "entail/synth.hpp"

namespace entail {

enum class Label : std::uint8_t { Positive, Negative };
enum class Perturbation : std::uint8_t { None, PremiseRemoved, PremiseSwapped, PremiseCopied, ConclusionNegated };

std::string to_string(Perturbation p);

struct LabeledStep {
    std::vector<std::string> premises;
    std::string conclusion;
    Label label = Label::Positive;
    Perturbation perturbation = Perturbation::None;
    std::string source_id;

    bool operator==(LabeledStep const&) const = default;
};

/// How many negatives of each kind to draw from one positive.
struct FlavorWeights {
    std::size_t removed = 1;
    std::size_t swapped = 1;
    std::size_t copied = 1;
    std::size_t negated = 0;
};

/// One positive per step; `hypothesis` is the sentence the proof concludes.
std::vector<LabeledStep> extract_positives(LinearProof const& proof,
                                           std::vector<std::string> const& context,
                                           std::string const& hypothesis,
                                           std::string const& source_id = {});

/// Throws NotEnoughPremises when removal is requested for a one-premise step
/// and EmptyCorpus when a swap is requested with an empty index. A swap that
/// finds no distractor outside the step is skipped.
std::vector<LabeledStep> make_negatives(LabeledStep const& positive,
                                        Bm25Index const& index,
                                        std::mt19937_64& rng,
                                        FlavorWeights const& weights = {});

struct VerifierDataConfig {
    FlavorWeights weights;
    /// Retrieve distractors from all contexts instead of the example's own.
    bool corpus_pool = false;
    std::uint64_t seed = 0;
    int jobs = 1;
};

/// Positives and negatives for every instance with a gold proof, in
/// instance order. Output is independent of `jobs`.
std::vector<LabeledStep> make_verifier_data(std::vector<TaskInstance> const& instances,
                                            VerifierDataConfig const& config);

nlohmann::ordered_json labeled_step_to_json(LabeledStep const& step);

}  // namespace entail
