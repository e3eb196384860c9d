#pragma once

// Templated sentences of the synthetic reasoning domain:
//
//   fact      "<entity> is [not ]<attribute>."
//   rule      "if <entity> is <a> [and <entity> is <b> ...] then <entity> is <c>."
//   negation  "I don't think <sentence>"   (flips the polarity of a fact)

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace entail::logic {

struct Literal {
    std::string entity;
    std::string attribute;
    bool positive = true;

    Literal negated() const { return {entity, attribute, !positive}; }
    auto operator<=>(Literal const&) const = default;
};

struct Rule {
    std::vector<Literal> antecedents;
    Literal consequent;

    auto operator<=>(Rule const&) const = default;
};

using Sentence = std::variant<Literal, Rule>;

/// Nullopt for anything outside the templates.
std::optional<Sentence> parse_sentence(std::string_view text);
std::optional<Literal> parse_literal(std::string_view text);

std::string render(Literal const& lit);
std::string render(Rule const& rule);

inline constexpr std::string_view kNegationPrefix = "I don't think ";

/// "The cat is nice." -> "I don't think the cat is nice."
std::string negate(std::string_view sentence);
/// Inverse of negate on its image; returns the input unchanged otherwise.
std::string strip_negation(std::string_view sentence);

/// Result of applying one rule to premises: the consequent when the premises
/// are exactly one rule plus literals matching all its antecedents.
std::optional<Literal> apply_once(std::vector<Sentence> const& premises);

/// All literals derivable from `sentences` by forward chaining to fixpoint.
std::vector<Literal> closure(std::vector<std::string> const& sentences);

}  // namespace entail::logic
