#pragma once

// Linearized proof format:
//
//   sent2 & sent4 -> int1: <text>; int1 & sent3 -> int2: <text>; int2 & sent1 -> hypothesis;
//
// Leaves are `sent<k>` (1-based into the context), generated intermediates are
// `int<k>`, the root is `hypothesis`. Steps appear in post-order.

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace entail {

enum class NodeKind : std::uint8_t { Sent, Int, Hypothesis };

struct NodeId {
    NodeKind kind = NodeKind::Sent;
    std::uint32_t index = 0;  // 0 for Hypothesis

    static NodeId sent(std::uint32_t k) { return {NodeKind::Sent, k}; }
    static NodeId intermediate(std::uint32_t k) { return {NodeKind::Int, k}; }
    static NodeId hypothesis() { return {NodeKind::Hypothesis, 0}; }

    bool is_sent() const { return kind == NodeKind::Sent; }
    bool is_int() const { return kind == NodeKind::Int; }
    bool is_hypothesis() const { return kind == NodeKind::Hypothesis; }

    std::string str() const;
    /// Parses `sentK`, `intK` or `hypothesis`; nullopt otherwise.
    static std::optional<NodeId> from_string(std::string_view s);

    // Sent < Int < Hypothesis, then by index.
    auto operator<=>(NodeId const&) const = default;
};

struct StepText {
    std::vector<NodeId> premises;
    NodeId conclusion = NodeId::hypothesis();
    /// Present iff the conclusion is an intermediate.
    std::optional<std::string> conclusion_text;

    bool operator==(StepText const&) const = default;
};

struct LinearProof {
    std::vector<StepText> steps;

    bool empty() const { return steps.empty(); }
    bool operator==(LinearProof const&) const = default;
};

/// A proof that concludes `hypothesis`. The tree reading of a linear proof:
/// every non-leaf node is the conclusion of exactly one step.
using ProofTree = LinearProof;

/// Parses a full proof against a context of `context_size` sentences.
/// Throws SyntaxError, UnknownPremise, DuplicateConclusion or EmptyProof.
LinearProof parse_proof(std::string_view text, std::size_t context_size);

/// Parses one step without checking premises against a context.
StepText parse_step(std::string_view text);

/// Checks the post-order invariants of `proof` against a context size.
void check_proof(LinearProof const& proof, std::size_t context_size);

/// Sorted premises and intermediates relabelled 1..k in step order.
LinearProof canonicalize(LinearProof const& proof);

/// Canonical text. Throws the same errors as check_proof for malformed input.
std::string serialize_proof(LinearProof const& proof);
std::string serialize_step(StepText const& step);

/// Whether `step` may be appended to a proof whose defined nodes are `available`.
bool validate_step(StepText const& step, std::set<NodeId> const& available);

nlohmann::json proof_to_json(LinearProof const& proof);
LinearProof proof_from_json(nlohmann::json const& j);

}  // namespace entail
