#include "entail/search.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "entail/errors.hpp"
#include "entail/text.hpp"

namespace entail {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

std::vector<Candidate> call_prover(StepSource& prover,
                                   std::string const& hypothesis,
                                   std::vector<std::string> const& context,
                                   LinearProof const& partial,
                                   std::size_t n)
{
    std::vector<Candidate> out;
    try {
        out = prover.generate(hypothesis, context, partial, n);
    } catch (BridgeError const&) {
        throw;
    } catch (std::exception const& e) {
        throw ProverFailure(e.what());
    }
    for (auto const& c : out) {
        if (!(c.score >= 0.0 && c.score <= 1.0)) {
            throw ProverFailure("prover score " + std::to_string(c.score) + " outside [0, 1]");
        }
    }
    return out;
}

double call_verifier(StepScorer& verifier,
                     std::vector<std::string> const& premises,
                     std::string const& conclusion,
                     bool concludes_hypothesis)
{
    double v = 0.0;
    try {
        v = concludes_hypothesis ? verifier.score_hypothesis_step(premises, conclusion)
                                 : verifier.score(premises, conclusion);
    } catch (BridgeError const&) {
        throw;
    } catch (std::exception const& e) {
        throw VerifierFailure(e.what());
    }
    if (!(v >= 0.0 && v <= 1.0)) {
        throw VerifierFailure("verifier score " + std::to_string(v) + " outside [0, 1]");
    }
    return v;
}

std::set<NodeId> available_ids(std::size_t context_size, LinearProof const& partial)
{
    std::set<NodeId> ids;
    for (std::uint32_t k = 1; k <= context_size; ++k) {
        ids.insert(NodeId::sent(k));
    }
    for (auto const& s : partial.steps) {
        if (s.conclusion.is_int()) {
            ids.insert(s.conclusion);
        }
    }
    return ids;
}

char const* outcome_name(ExecutionOutcome o)
{
    switch (o) {
    case ExecutionOutcome::NoOp: return "noop";
    case ExecutionOutcome::Created: return "created";
    case ExecutionOutcome::Improved: return "improved";
    }
    return "?";
}

// A well-formed step resolved against the graph.
struct GraphCandidate {
    StepText step;
    std::vector<std::size_t> premises;
    StepConclusion conclusion;
    double p_score = 0.0;
    double v_score = 0.0;
    double score = 0.0;
};

std::optional<GraphCandidate> resolve(ProofGraph const& graph,
                                      StepText const& step,
                                      std::vector<std::size_t> const& node_of_int)
{
    GraphCandidate gc;
    gc.step = step;
    for (auto const& p : step.premises) {
        if (p.is_sent()) {
            gc.premises.push_back(graph.fact_index(p.index));
        } else if (p.is_int() && p.index >= 1 && p.index <= node_of_int.size()) {
            gc.premises.push_back(node_of_int[p.index - 1]);
        } else {
            return std::nullopt;
        }
    }
    if (step.conclusion.is_hypothesis()) {
        gc.conclusion = StepConclusion::of_hypothesis();
    } else {
        gc.conclusion = StepConclusion::of_sentence(*step.conclusion_text);
        if (graph.find_sentence(*step.conclusion_text) == graph.hypothesis_index()) {
            gc.conclusion = StepConclusion::of_hypothesis();
        }
    }
    return gc;
}

void score_candidate(GraphCandidate& gc,
                     ProofGraph const& graph,
                     StepScorer& verifier,
                     SearchConfig const& config)
{
    if (config.score_mix == ScoreMix::ProverOnly) {
        gc.v_score = 0.0;
    } else {
        std::vector<std::string> premises;
        premises.reserve(gc.premises.size());
        for (auto p : gc.premises) {
            premises.push_back(graph.node(p).text);
        }
        std::string const& conclusion =
            gc.conclusion.hypothesis ? graph.node(graph.hypothesis_index()).text : gc.conclusion.text;
        gc.v_score = call_verifier(verifier, premises, conclusion, gc.conclusion.hypothesis);
    }
    gc.score = mix_scores(gc.p_score, gc.v_score, config.score_mix);
}

}  // namespace

std::string to_string(ScoreMix mix)
{
    switch (mix) {
    case ScoreMix::Average: return "average";
    case ScoreMix::ProverOnly: return "prover-only";
    case ScoreMix::VerifierOnly: return "verifier-only";
    }
    return "average";
}

ScoreMix score_mix_from_string(std::string const& s)
{
    if (s == "average") {
        return ScoreMix::Average;
    }
    if (s == "prover-only") {
        return ScoreMix::ProverOnly;
    }
    if (s == "verifier-only") {
        return ScoreMix::VerifierOnly;
    }
    throw ConfigError("unknown score mix '" + s + "'");
}

double mix_scores(double p_score, double v_score, ScoreMix mode)
{
    for (double v : {p_score, v_score}) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("score " + std::to_string(v) + " outside [0, 1]");
        }
    }
    switch (mode) {
    case ScoreMix::Average: return (p_score + v_score) / 2.0;
    case ScoreMix::ProverOnly: return p_score;
    case ScoreMix::VerifierOnly: return v_score;
    }
    return 0.0;
}

void SearchConfig::validate() const
{
    if (num_candidates < 1) {
        throw ConfigError("num_candidates must be at least 1");
    }
    if (!(min_improvement >= 0.0)) {
        throw ConfigError("min_improvement must be non-negative");
    }
}

GreedyProof generate_greedy(StepSource& prover,
                            std::string const& hypothesis,
                            std::vector<std::string> const& context,
                            std::size_t num_candidates)
{
    GreedyProof greedy;
    std::set<std::string> known;  // normalized sentences already available
    for (auto const& c : context) {
        known.insert(normalize_sentence(c));
    }
    auto const hypothesis_key = normalize_sentence(hypothesis);
    std::uint32_t next_int = 1;
    std::size_t const budget = 2 * context.size();

    while (greedy.proof.steps.size() < budget) {
        auto candidates = call_prover(prover, hypothesis, context, greedy.proof, num_candidates);
        auto available = available_ids(context.size(), greedy.proof);
        std::optional<Candidate> chosen;
        for (auto& c : candidates) {
            if (!validate_step(c.step, available)) {
                continue;
            }
            if (c.step.conclusion.is_int()) {
                auto key = normalize_sentence(*c.step.conclusion_text);
                if (key == hypothesis_key) {
                    c.step.conclusion = NodeId::hypothesis();
                    c.step.conclusion_text.reset();
                } else if (known.count(key) != 0) {
                    continue;
                }
            }
            chosen = std::move(c);
            break;
        }
        if (!chosen) {
            break;
        }
        if (chosen->step.conclusion.is_int()) {
            known.insert(normalize_sentence(*chosen->step.conclusion_text));
            chosen->step.conclusion = NodeId::intermediate(next_int++);
        }
        bool done = chosen->step.conclusion.is_hypothesis();
        greedy.proof.steps.push_back(std::move(chosen->step));
        greedy.prover_scores.push_back(chosen->score);
        if (done) {
            greedy.complete = true;
            break;
        }
    }
    return greedy;
}

SearchResult run_search(StepSource& prover,
                        StepScorer& verifier,
                        std::string const& hypothesis,
                        std::vector<std::string> const& context,
                        SearchConfig const& config)
{
    config.validate();
    if (context.empty()) {
        throw ConfigError("proof search needs a nonempty context");
    }
    SearchResult result{std::nullopt, 0.0, 0, ProofGraph(hypothesis, context), std::nullopt};
    ProofGraph& graph = result.graph;
    std::mt19937_64 rng(config.seed);

    try {
        // Initialization from the greedy proof.
        auto greedy = generate_greedy(prover, hypothesis, context, config.num_candidates);
        std::vector<std::size_t> node_of_int;
        for (std::size_t i = 0; i < greedy.proof.steps.size(); ++i) {
            auto const& step = greedy.proof.steps[i];
            auto gc = resolve(graph, step, node_of_int);
            if (!gc) {
                break;
            }
            gc->p_score = greedy.prover_scores[i];
            score_candidate(*gc, graph, verifier, config);
            try {
                graph.execute_step(gc->premises, gc->conclusion, gc->score, config.min_improvement);
            } catch (InvalidStep const&) {
                break;
            }
            if (step.conclusion.is_int()) {
                auto node = graph.find_sentence(*step.conclusion_text);
                if (!node) {
                    break;  // a zero-score step leaves the intermediate out of the graph
                }
                node_of_int.push_back(*node);
            }
        }

        std::set<std::string> explored;
        std::size_t idle = 0;
        while (config.search && result.iterations < config.max_iterations) {
            auto partial = graph.sample_partial_proof(explored, rng, config.max_sample_retries);
            if (!partial) {
                break;
            }
            explored.insert(partial->fingerprint);
            auto rendered = graph.render(*partial);

            auto t0 = Clock::now();
            auto candidates = call_prover(prover, hypothesis, context, rendered.proof, config.num_candidates);
            double prover_ms = ms_since(t0);

            auto available = available_ids(context.size(), rendered.proof);
            std::vector<GraphCandidate> steps;
            std::size_t ill_formed = 0;
            for (auto const& c : candidates) {
                if (!validate_step(c.step, available)) {
                    ++ill_formed;
                    continue;
                }
                auto gc = resolve(graph, c.step, rendered.node_of_int);
                if (!gc) {
                    ++ill_formed;
                    continue;
                }
                gc->p_score = c.score;
                steps.push_back(std::move(*gc));
            }
            auto t1 = Clock::now();
            for (auto& gc : steps) {
                score_candidate(gc, graph, verifier, config);
            }
            double verifier_ms = ms_since(t1);

            std::stable_sort(steps.begin(), steps.end(),
                             [](GraphCandidate const& a, GraphCandidate const& b) { return a.score > b.score; });

            std::size_t changed = 0;
            auto records = nlohmann::json::array();
            for (auto const& gc : steps) {
                std::string outcome;
                try {
                    auto o = graph.execute_step(gc.premises, gc.conclusion, gc.score, config.min_improvement);
                    changed += o == ExecutionOutcome::NoOp ? 0 : 1;
                    outcome = outcome_name(o);
                } catch (InvalidStep const&) {
                    outcome = "invalid";
                }
                if (config.trace) {
                    records.push_back({{"step", serialize_step(gc.step)},
                                       {"p_score", gc.p_score},
                                       {"v_score", gc.v_score},
                                       {"score", gc.score},
                                       {"outcome", outcome}});
                }
            }
            ++result.iterations;
            if (config.trace) {
                config.trace({{"iteration", result.iterations},
                              {"partial_proof", partial->fingerprint},
                              {"partial_dsl", rendered.proof.empty() ? "" : serialize_proof(rendered.proof)},
                              {"candidates", records},
                              {"ill_formed", ill_formed},
                              {"hypothesis_score", graph.hypothesis_score()},
                              {"prover_ms", prover_ms},
                              {"verifier_ms", verifier_ms}});
            }
            idle = changed == 0 ? idle + 1 : 0;
            if (idle >= std::max<std::size_t>(config.patience, 1)) {
                break;
            }
        }
    } catch (BridgeError const& e) {
        result.error = e.what();
        result.bridge_failure = true;
    } catch (Error const& e) {
        result.error = e.what();
    }

    result.proof_score = graph.hypothesis_score();
    if (graph.node(graph.hypothesis_index()).inbound_step) {
        result.proof = graph.extract_proof();
    }
    return result;
}

}  // namespace entail
