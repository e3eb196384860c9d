#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "entail/proof_dsl.hpp"

namespace entail {

/// Min aggregation: a node is as trustworthy as its weakest support.
/// Throws DomainError if any input lies outside [0, 1] or `child_scores` is empty.
double node_score(double step_score, std::span<const double> child_scores);

enum class NodeRole : std::uint8_t { Fact, Intermediate, Hypothesis };

struct GraphNode {
    NodeRole role = NodeRole::Fact;
    std::string text;      // as first seen
    std::string sentence;  // normalized identity key
    double score = 0.0;
    std::optional<std::size_t> inbound_step;
};

struct StepNode {
    std::vector<std::size_t> premises;
    std::size_t conclusion = 0;
    double score = 0.0;
    bool active = true;  // false once replaced by a better step
};

enum class ExecutionOutcome : std::uint8_t { NoOp, Created, Improved };

/// Conclusion of a step being executed: the hypothesis, or a sentence that is
/// looked up among existing intermediates (and created when absent).
struct StepConclusion {
    bool hypothesis = false;
    std::string text;

    static StepConclusion of_hypothesis() { return {true, {}}; }
    static StepConclusion of_sentence(std::string t) { return {false, std::move(t)}; }
};

/// A predecessor-closed set of intermediate nodes.
struct PartialProof {
    std::vector<std::size_t> intermediates;  // ascending node index
    std::string fingerprint;
};

/// A partial proof rendered for a step source: `int<k>` refers to node_of_int[k-1].
struct RenderedProof {
    LinearProof proof;
    std::vector<std::size_t> node_of_int;
};

/// Scored and-or graph of facts, intermediates, steps and the hypothesis.
///
/// Node layout: facts occupy [0, |C|), the hypothesis is at |C|, and
/// intermediates follow in creation order. Every intermediate or hypothesis
/// has at most one active inbound step; scores obey the min aggregation
/// along active steps at all times.
class ProofGraph {
  public:
    ProofGraph(std::string hypothesis, std::vector<std::string> const& context);

    std::size_t num_facts() const { return m_num_facts; }
    std::size_t hypothesis_index() const { return m_num_facts; }
    std::size_t fact_index(std::uint32_t sent_k) const { return sent_k - 1; }
    std::size_t size() const { return m_nodes.size(); }

    GraphNode const& node(std::size_t i) const { return m_nodes.at(i); }
    std::vector<GraphNode> const& nodes() const { return m_nodes; }
    std::vector<StepNode> const& steps() const { return m_steps; }
    double hypothesis_score() const { return m_nodes[hypothesis_index()].score; }

    /// Existing intermediate or hypothesis whose sentence matches `text`.
    std::optional<std::size_t> find_sentence(std::string const& text) const;

    /// Executes one step. `min_improvement` widens the no-op band: an existing
    /// node is only updated when the tentative score exceeds its score by more
    /// than this margin. Throws InvalidStep for premises outside the graph or a
    /// conclusion that names a given fact; DomainError for scores outside [0,1].
    ExecutionOutcome execute_step(std::span<const std::size_t> premises,
                                  StepConclusion const& conclusion,
                                  double step_score,
                                  double min_improvement = 0.0);

    /// Intermediates and hypothesis reachable backwards from `node` via active steps.
    std::set<std::size_t> predecessors(std::size_t node) const;
    /// Nodes whose active inbound step uses `node` as a premise, transitively.
    std::set<std::size_t> successors(std::size_t node) const;

    /// Topological order of all nodes, predecessors first.
    std::vector<std::size_t> topological_order() const;

    bool is_acyclic() const;

    /// Samples a partial proof not yet in `explored`. Nodes are visited
    /// successors first; each unvisited node joins with probability 1/2 and
    /// drags all its predecessors in with it. Nullopt after `max_retries`
    /// draws that only produced explored partial proofs.
    std::optional<PartialProof> sample_partial_proof(std::set<std::string> const& explored,
                                                     std::mt19937_64& rng,
                                                     std::size_t max_retries = 32) const;

    /// Canonical fingerprint of a set of intermediates.
    std::string fingerprint(std::span<const std::size_t> intermediates) const;

    RenderedProof render(PartialProof const& partial) const;

    /// The hypothesis and all its predecessors as a proof. Throws NoProof when
    /// the hypothesis has no inbound step.
    ProofTree extract_proof() const;

    nlohmann::json to_json() const;

  private:
    std::size_t add_intermediate(std::string const& text);
    void attach_step(std::size_t step_index);
    void detach_step(std::size_t step_index);
    void propagate_from(std::size_t node);
    double recompute(std::size_t node) const;
    std::vector<std::size_t> ordered_closure(std::set<std::size_t> const& members) const;
    LinearProof render_nodes(std::vector<std::size_t> const& ordered,
                             std::vector<std::size_t>* node_of_int) const;

    std::size_t m_num_facts = 0;
    std::vector<GraphNode> m_nodes;
    std::vector<StepNode> m_steps;
    // node -> active steps that use it as a premise
    std::vector<std::vector<std::size_t>> m_out_steps;
    std::unordered_map<std::string, std::size_t> m_by_sentence;  // intermediates + hypothesis
    std::unordered_map<std::string, std::size_t> m_fact_sentences;
};

}  // namespace entail
