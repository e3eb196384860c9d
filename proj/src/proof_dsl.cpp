#include "entail/proof_dsl.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <map>

#include "entail/errors.hpp"
#include "entail/text.hpp"

namespace entail {

namespace {

constexpr std::string_view kSent = "sent";
constexpr std::string_view kInt = "int";
constexpr std::string_view kHypothesis = "hypothesis";

std::optional<std::uint32_t> parse_index(std::string_view digits)
{
    if (digits.empty() || digits.size() > 9) {
        return std::nullopt;
    }
    for (char c : digits) {
        if (c < '0' || c > '9') {
            return std::nullopt;
        }
    }
    std::uint32_t v = 0;
    std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (v == 0) {
        return std::nullopt;
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

bool blank(std::string_view s) { return trim(s).empty(); }

NodeId parse_premise(std::string_view token)
{
    auto t = trim(token);
    auto id = NodeId::from_string(t);
    if (!id) {
        throw SyntaxError("malformed premise '" + t + "'");
    }
    if (id->is_hypothesis()) {
        throw SyntaxError("hypothesis cannot be a premise");
    }
    return *id;
}

}  // namespace

std::string NodeId::str() const
{
    switch (kind) {
    case NodeKind::Sent: return std::string(kSent) + std::to_string(index);
    case NodeKind::Int: return std::string(kInt) + std::to_string(index);
    case NodeKind::Hypothesis: return std::string(kHypothesis);
    }
    return {};
}

std::optional<NodeId> NodeId::from_string(std::string_view s)
{
    if (s == kHypothesis) {
        return hypothesis();
    }
    if (s.starts_with(kSent)) {
        if (auto k = parse_index(s.substr(kSent.size()))) {
            return sent(*k);
        }
        return std::nullopt;
    }
    if (s.starts_with(kInt)) {
        if (auto k = parse_index(s.substr(kInt.size()))) {
            return intermediate(*k);
        }
    }
    return std::nullopt;
}

StepText parse_step(std::string_view text)
{
    auto body = trim(text);
    if (!body.empty() && body.back() == ';') {
        body.pop_back();
    }
    auto arrow = body.find("->");
    if (arrow == std::string::npos) {
        throw SyntaxError("step without '->': '" + body + "'");
    }
    std::string_view lhs = std::string_view(body).substr(0, arrow);
    std::string_view rhs = std::string_view(body).substr(arrow + 2);

    StepText step;
    for (auto tok : split(lhs, '&')) {
        auto id = parse_premise(tok);
        if (std::find(step.premises.begin(), step.premises.end(), id) != step.premises.end()) {
            throw SyntaxError("duplicate premise " + id.str());
        }
        step.premises.push_back(id);
    }

    auto conclusion = trim(rhs);
    auto colon = conclusion.find(':');
    std::string head = trim(std::string_view(conclusion).substr(0, colon));
    auto id = NodeId::from_string(head);
    if (!id) {
        throw SyntaxError("malformed conclusion '" + head + "'");
    }
    if (id->is_sent()) {
        throw SyntaxError("conclusion cannot be a given sentence (" + head + ")");
    }
    step.conclusion = *id;
    if (id->is_int()) {
        if (colon == std::string::npos) {
            throw SyntaxError(head + " has no conclusion text");
        }
        auto sentence = trim(std::string_view(conclusion).substr(colon + 1));
        if (sentence.empty()) {
            throw SyntaxError(head + " has empty conclusion text");
        }
        step.conclusion_text = std::move(sentence);
    }
    return step;
}

void check_proof(LinearProof const& proof, std::size_t context_size)
{
    if (proof.steps.empty()) {
        throw EmptyProof("proof has no steps");
    }
    std::set<std::uint32_t> defined;
    bool concluded_hypothesis = false;
    for (auto const& step : proof.steps) {
        if (step.premises.empty()) {
            throw SyntaxError("step without premises");
        }
        std::set<NodeId> seen;
        for (auto const& p : step.premises) {
            if (!seen.insert(p).second) {
                throw SyntaxError("duplicate premise " + p.str());
            }
            if (p.is_hypothesis()) {
                throw SyntaxError("hypothesis cannot be a premise");
            }
            if (p.index == 0) {
                throw SyntaxError("index 0 in " + p.str());
            }
            if (p.is_sent() && p.index > context_size) {
                throw UnknownPremise(p.str() + " is outside the context");
            }
            if (p.is_int() && defined.count(p.index) == 0) {
                throw UnknownPremise(p.str() + " is used before it is defined");
            }
        }
        switch (step.conclusion.kind) {
        case NodeKind::Sent:
            throw SyntaxError("conclusion cannot be a given sentence");
        case NodeKind::Int:
            if (step.conclusion.index == 0) {
                throw SyntaxError("index 0 in conclusion");
            }
            if (!step.conclusion_text || trim(*step.conclusion_text).empty()) {
                throw SyntaxError(step.conclusion.str() + " has no conclusion text");
            }
            if (step.conclusion_text->find(';') != std::string::npos) {
                throw SyntaxError("conclusion text may not contain ';'");
            }
            if (!defined.insert(step.conclusion.index).second) {
                throw DuplicateConclusion(step.conclusion.str() + " concluded twice");
            }
            break;
        case NodeKind::Hypothesis:
            if (concluded_hypothesis) {
                throw DuplicateConclusion("hypothesis concluded twice");
            }
            concluded_hypothesis = true;
            break;
        }
    }
}

LinearProof parse_proof(std::string_view text, std::size_t context_size)
{
    auto parts = split(text, ';');
    while (!parts.empty() && blank(parts.back())) {
        parts.pop_back();
    }
    LinearProof proof;
    for (auto part : parts) {
        if (blank(part)) {
            throw SyntaxError("empty step");
        }
        proof.steps.push_back(parse_step(part));
    }
    check_proof(proof, context_size);
    return proof;
}

LinearProof canonicalize(LinearProof const& proof)
{
    std::map<std::uint32_t, std::uint32_t> relabel;
    LinearProof out;
    out.steps.reserve(proof.steps.size());
    for (auto const& step : proof.steps) {
        StepText s = step;
        for (auto& p : s.premises) {
            if (p.is_int()) {
                auto it = relabel.find(p.index);
                if (it != relabel.end()) {
                    p.index = it->second;
                }
            }
        }
        std::sort(s.premises.begin(), s.premises.end());
        if (s.conclusion.is_int()) {
            auto next = static_cast<std::uint32_t>(relabel.size() + 1);
            relabel.emplace(s.conclusion.index, next);
            s.conclusion.index = relabel[s.conclusion.index];
        }
        if (s.conclusion_text) {
            s.conclusion_text = trim(*s.conclusion_text);
        }
        out.steps.push_back(std::move(s));
    }
    return out;
}

std::string serialize_step(StepText const& step)
{
    std::string out;
    for (size_t i = 0; i < step.premises.size(); ++i) {
        if (i > 0) {
            out += " & ";
        }
        out += step.premises[i].str();
    }
    out += " -> ";
    out += step.conclusion.str();
    if (step.conclusion.is_int() && step.conclusion_text) {
        out += ": ";
        out += *step.conclusion_text;
    }
    out += ";";
    return out;
}

std::string serialize_proof(LinearProof const& proof)
{
    check_proof(proof, std::numeric_limits<std::size_t>::max());
    auto canonical = canonicalize(proof);
    std::string out;
    for (size_t i = 0; i < canonical.steps.size(); ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += serialize_step(canonical.steps[i]);
    }
    return out;
}

bool validate_step(StepText const& step, std::set<NodeId> const& available)
{
    if (step.premises.empty()) {
        return false;
    }
    std::set<NodeId> seen;
    for (auto const& p : step.premises) {
        if (!seen.insert(p).second || available.count(p) == 0) {
            return false;
        }
    }
    if (seen.count(step.conclusion) != 0) {
        return false;
    }
    if (step.conclusion.is_sent()) {
        return false;
    }
    if (step.conclusion.is_int()) {
        if (!step.conclusion_text || trim(*step.conclusion_text).empty()) {
            return false;
        }
        if (available.count(step.conclusion) != 0) {
            return false;
        }
    }
    return true;
}

nlohmann::json proof_to_json(LinearProof const& proof)
{
    auto steps = nlohmann::json::array();
    for (auto const& s : proof.steps) {
        auto premises = nlohmann::json::array();
        for (auto const& p : s.premises) {
            premises.push_back(p.str());
        }
        nlohmann::json text = nullptr;
        if (s.conclusion_text) {
            text = *s.conclusion_text;
        }
        steps.push_back({{"premises", premises}, {"conclusion", s.conclusion.str()}, {"text", text}});
    }
    return {{"steps", steps}};
}

LinearProof proof_from_json(nlohmann::json const& j)
{
    LinearProof proof;
    try {
        for (auto const& s : j.at("steps")) {
            StepText step;
            for (auto const& p : s.at("premises")) {
                step.premises.push_back(parse_premise(p.get<std::string>()));
            }
            auto c = NodeId::from_string(s.at("conclusion").get<std::string>());
            if (!c) {
                throw SyntaxError("malformed conclusion in JSON proof");
            }
            step.conclusion = *c;
            if (s.contains("text") && !s.at("text").is_null() && c->is_int()) {
                step.conclusion_text = s.at("text").get<std::string>();
            }
            proof.steps.push_back(std::move(step));
        }
    } catch (nlohmann::json::exception const& e) {
        throw SyntaxError(std::string("malformed JSON proof: ") + e.what());
    }
    return proof;
}

}  // namespace entail
