#include "entail/batch.hpp"

#include <algorithm>
#include <mutex>

#include "entail/errors.hpp"
#include "entail/logic.hpp"

namespace entail {

namespace {

Attempt attempt(TaskInstance const& inst,
                std::size_t index,
                bool negated,
                SourceFactory const& factory,
                BatchConfig const& config)
{
    Attempt out;
    try {
        auto sources = factory(inst, index, negated);
        SearchConfig sc = config.search;
        sc.seed = instance_seed(config.search.seed, 2 * index + (negated ? 1 : 0));
        if (config.trace) {
            static std::mutex trace_mutex;
            sc.trace = [&](nlohmann::json const& record) {
                std::lock_guard<std::mutex> lock(trace_mutex);
                config.trace(inst.id, negated, record);
            };
        }
        auto hypothesis = negated ? logic::negate(inst.hypothesis) : inst.hypothesis;
        auto result = run_search(*sources.prover, *sources.verifier, hypothesis, inst.context, sc);
        out.proof = std::move(result.proof);
        out.proof_score = result.proof_score;
        out.iterations = result.iterations;
        out.error = std::move(result.error);
        out.bridge_failure = result.bridge_failure;
    } catch (BridgeError const& e) {
        out.error = e.what();
        out.bridge_failure = true;
    } catch (Error const& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace

Prediction predict_instance(TaskInstance const& inst,
                            std::size_t index,
                            SourceFactory const& factory,
                            BatchConfig const& config)
{
    Prediction p;
    p.id = inst.id;
    p.hypothesis = attempt(inst, index, false, factory, config);
    if (config.negation) {
        p.negation = attempt(inst, index, true, factory, config);
    }
    return p;
}

std::vector<Prediction> run_batch_serial(std::vector<TaskInstance> const& instances,
                                         SourceFactory const& factory,
                                         BatchConfig const& config)
{
    std::vector<Prediction> out;
    out.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        out.push_back(predict_instance(instances[i], i, factory, config));
    }
    return out;
}

std::vector<Prediction> run_batch(std::vector<TaskInstance> const& instances,
                                  SourceFactory const& factory,
                                  BatchConfig const& config)
{
    std::vector<Prediction> out(instances.size());
    auto n = static_cast<std::int64_t>(instances.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, config.jobs))
    for (std::int64_t i = 0; i < n; ++i) {
        auto k = static_cast<std::size_t>(i);
        out[k] = predict_instance(instances[k], k, factory, config);
    }
    return out;
}

SourceFactory builtin_factory(BuiltinSources const& spec)
{
    if (spec.prover != "exact" && spec.prover != "noisy" && spec.prover != "oracle") {
        throw ConfigError("unknown built-in prover '" + spec.prover + "'");
    }
    if (spec.verifier != "exact" && spec.verifier != "oracle") {
        throw ConfigError("unknown built-in verifier '" + spec.verifier + "'");
    }
    if (spec.prover == "noisy" && !(spec.drop >= 0.0 && spec.drop <= 1.0 && spec.inject >= 0.0 && spec.inject <= 1.0)) {
        throw ConfigError("noise rates must lie in [0, 1]");
    }
    return [spec](TaskInstance const& inst, std::size_t index, bool negated) {
        // The gold proof concludes proved_sentence(); it only helps the search
        // whose hypothesis is that sentence.
        bool gold_side = inst.gold_proof && (negated == (inst.answer == Answer::Disproved));
        auto hypothesis = negated ? logic::negate(inst.hypothesis) : inst.hypothesis;
        SourcePair s;
        if (spec.prover == "noisy") {
            s.prover = std::make_unique<NoisyProver>(spec.drop, spec.inject,
                                                     instance_seed(spec.seed, 2 * index + (negated ? 1 : 0)));
        } else {
            s.prover = std::make_unique<ExactProver>();
        }
        if (spec.prover == "oracle" && gold_side) {
            s.prover = std::make_unique<OracleProver>(std::move(s.prover), *inst.gold_proof);
        }
        s.verifier = std::make_unique<ExactVerifier>();
        if (spec.verifier == "oracle" && gold_side) {
            s.verifier = std::make_unique<OracleVerifier>(std::move(s.verifier), *inst.gold_proof, hypothesis, inst.context);
        }
        return s;
    };
}

}  // namespace entail
