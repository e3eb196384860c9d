#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "entail/eval.hpp"
#include "entail/search.hpp"
#include "entail/step_sources.hpp"
#include "entail/synth.hpp"

namespace entail {

struct SourcePair {
    std::unique_ptr<StepSource> prover;
    std::unique_ptr<StepScorer> verifier;
};

/// Fresh sources for one search; `negated` is set for the search on the
/// negated hypothesis.
using SourceFactory = std::function<SourcePair(TaskInstance const& inst, std::size_t index, bool negated)>;

/// Receives (instance id, negated, iteration record). Calls are serialized.
using BatchTrace = std::function<void(std::string const&, bool, nlohmann::json const&)>;

struct BatchConfig {
    SearchConfig search;
    /// Also search for the negated hypothesis, for answer classification.
    bool negation = true;
    int jobs = 1;
    BatchTrace trace;
};

/// Searches one instance. Search seeds derive from (search.seed, index).
Prediction predict_instance(TaskInstance const& inst,
                            std::size_t index,
                            SourceFactory const& factory,
                            BatchConfig const& config);

/// Reference implementation: one instance after another.
std::vector<Prediction> run_batch_serial(std::vector<TaskInstance> const& instances,
                                         SourceFactory const& factory,
                                         BatchConfig const& config);

/// Instances spread over `jobs` OpenMP threads; output in input order and
/// identical to run_batch_serial.
std::vector<Prediction> run_batch(std::vector<TaskInstance> const& instances,
                                  SourceFactory const& factory,
                                  BatchConfig const& config);

/// Built-in sources by name: prover exact|noisy|oracle, verifier exact|oracle.
struct BuiltinSources {
    std::string prover = "exact";
    std::string verifier = "exact";
    double drop = 0.3;
    double inject = 0.3;
    std::uint64_t seed = 0;
};

/// Throws ConfigError for unknown names.
SourceFactory builtin_factory(BuiltinSources const& spec);

}  // namespace entail
