#include "entail/logic.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "entail/text.hpp"

namespace entail::logic {

namespace {

constexpr std::string_view kIs = " is ";
constexpr std::string_view kNot = "not ";
constexpr std::string_view kIf = "if ";
constexpr std::string_view kThen = " then ";
constexpr std::string_view kAnd = " and ";
constexpr std::string_view kNormNegation = "i don't think ";

bool is_word(std::string_view w)
{
    return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == ' ';
    });
}

// Operates on normalized text.
std::optional<Literal> parse_plain_literal(std::string_view s)
{
    auto pos = s.find(kIs);
    if (pos == std::string_view::npos) {
        return std::nullopt;
    }
    Literal lit;
    auto entity = s.substr(0, pos);
    auto rest = s.substr(pos + kIs.size());
    if (rest.starts_with(kNot)) {
        lit.positive = false;
        rest.remove_prefix(kNot.size());
    }
    if (!is_word(entity) || !is_word(rest) || rest.find(' ') != std::string_view::npos) {
        return std::nullopt;
    }
    lit.entity = std::string(entity);
    lit.attribute = std::string(rest);
    return lit;
}

std::optional<Literal> parse_normalized_literal(std::string_view s)
{
    bool flip = false;
    while (s.starts_with(kNormNegation)) {
        flip = !flip;
        s.remove_prefix(kNormNegation.size());
    }
    auto lit = parse_plain_literal(s);
    if (lit && flip) {
        lit->positive = !lit->positive;
    }
    return lit;
}

std::vector<std::string_view> split_on(std::string_view s, std::string_view sep)
{
    std::vector<std::string_view> parts;
    size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + sep.size();
    }
}

}  // namespace

std::optional<Literal> parse_literal(std::string_view text)
{
    return parse_normalized_literal(normalize_sentence(text));
}

std::optional<Sentence> parse_sentence(std::string_view text)
{
    auto s = normalize_sentence(text);
    std::string_view v = s;
    if (v.starts_with(kIf)) {
        v.remove_prefix(kIf.size());
        auto then = v.find(kThen);
        if (then == std::string_view::npos) {
            return std::nullopt;
        }
        Rule rule;
        for (auto part : split_on(v.substr(0, then), kAnd)) {
            auto lit = parse_plain_literal(part);
            if (!lit) {
                return std::nullopt;
            }
            rule.antecedents.push_back(std::move(*lit));
        }
        auto consequent = parse_plain_literal(v.substr(then + kThen.size()));
        if (!consequent) {
            return std::nullopt;
        }
        rule.consequent = std::move(*consequent);
        return rule;
    }
    if (auto lit = parse_normalized_literal(v)) {
        return *lit;
    }
    return std::nullopt;
}

std::string render(Literal const& lit)
{
    return lit.entity + std::string(kIs) + (lit.positive ? "" : std::string(kNot)) + lit.attribute + ".";
}

namespace {
std::string render_clause(Literal const& lit)
{
    auto s = render(lit);
    s.pop_back();
    return s;
}
}  // namespace

std::string render(Rule const& rule)
{
    std::string out(kIf);
    for (size_t i = 0; i < rule.antecedents.size(); ++i) {
        if (i > 0) {
            out += kAnd;
        }
        out += render_clause(rule.antecedents[i]);
    }
    out += kThen;
    out += render(rule.consequent);
    return out;
}

std::string negate(std::string_view sentence)
{
    std::string out(kNegationPrefix);
    std::string body(sentence);
    if (!body.empty()) {
        body[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(body[0])));
    }
    return out + body;
}

std::string strip_negation(std::string_view sentence)
{
    if (sentence.starts_with(kNegationPrefix)) {
        return std::string(sentence.substr(kNegationPrefix.size()));
    }
    return std::string(sentence);
}

std::optional<Literal> apply_once(std::vector<Sentence> const& premises)
{
    Rule const* rule = nullptr;
    std::set<Literal> facts;
    for (auto const& p : premises) {
        if (auto const* r = std::get_if<Rule>(&p)) {
            if (rule != nullptr) {
                return std::nullopt;
            }
            rule = r;
        } else {
            facts.insert(std::get<Literal>(p));
        }
    }
    if (rule == nullptr) {
        return std::nullopt;
    }
    std::set<Literal> needed(rule->antecedents.begin(), rule->antecedents.end());
    if (needed != facts) {
        return std::nullopt;
    }
    return rule->consequent;
}

std::vector<Literal> closure(std::vector<std::string> const& sentences)
{
    std::set<Literal> known;
    std::vector<Rule> rules;
    for (auto const& s : sentences) {
        auto parsed = parse_sentence(s);
        if (!parsed) {
            continue;
        }
        if (auto const* lit = std::get_if<Literal>(&*parsed)) {
            known.insert(*lit);
        } else {
            rules.push_back(std::get<Rule>(*parsed));
        }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto const& r : rules) {
            bool fires = std::all_of(r.antecedents.begin(), r.antecedents.end(),
                                     [&](Literal const& a) { return known.count(a) != 0; });
            if (fires && known.insert(r.consequent).second) {
                changed = true;
            }
        }
    }
    return {known.begin(), known.end()};
}

}  // namespace entail::logic
