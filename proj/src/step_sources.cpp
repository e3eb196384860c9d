#include "entail/step_sources.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "entail/logic.hpp"
#include "entail/text.hpp"

namespace entail {

namespace {

std::map<std::uint32_t, std::string> partial_texts(LinearProof const& partial)
{
    std::map<std::uint32_t, std::string> texts;
    for (auto const& s : partial.steps) {
        if (s.conclusion.is_int() && s.conclusion_text) {
            texts[s.conclusion.index] = *s.conclusion_text;
        }
    }
    return texts;
}

std::uint32_t next_int(LinearProof const& partial)
{
    std::uint32_t k = 0;
    for (auto const& s : partial.steps) {
        if (s.conclusion.is_int()) {
            k = std::max(k, s.conclusion.index);
        }
    }
    return k + 1;
}

std::string step_key(std::vector<NodeId> premises, std::string const& conclusion)
{
    std::sort(premises.begin(), premises.end());
    std::string key;
    for (auto const& p : premises) {
        key += p.str() + "&";
    }
    return key + "->" + conclusion;
}

std::string conclusion_key(StepText const& step)
{
    if (step.conclusion.is_hypothesis()) {
        return "hypothesis";
    }
    return normalize_sentence(step.conclusion_text.value_or(""));
}

}  // namespace

std::vector<std::string> premise_sentences(StepText const& step,
                                           std::vector<std::string> const& context,
                                           LinearProof const& partial)
{
    auto texts = partial_texts(partial);
    std::vector<std::string> out;
    out.reserve(step.premises.size());
    for (auto const& p : step.premises) {
        if (p.is_sent() && p.index >= 1 && p.index <= context.size()) {
            out.push_back(context[p.index - 1]);
        } else if (p.is_int() && texts.count(p.index) != 0) {
            out.push_back(texts[p.index]);
        } else {
            out.emplace_back();
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<Candidate> ExactProver::generate(std::string const& hypothesis,
                                             std::vector<std::string> const& context,
                                             LinearProof const& partial,
                                             std::size_t n)
{
    using logic::Literal;
    using logic::Rule;

    auto goal = logic::parse_literal(hypothesis);

    std::map<Literal, NodeId> available;
    std::vector<std::pair<NodeId, Rule>> rules;
    for (std::uint32_t k = 1; k <= context.size(); ++k) {
        auto parsed = logic::parse_sentence(context[k - 1]);
        if (!parsed) {
            continue;
        }
        if (auto const* lit = std::get_if<Literal>(&*parsed)) {
            available.emplace(*lit, NodeId::sent(k));
        } else {
            rules.emplace_back(NodeId::sent(k), std::get<Rule>(*parsed));
        }
    }
    std::set<Literal> in_context;
    for (auto const& [lit, id] : available) {
        in_context.insert(lit);
    }
    for (auto const& [k, text] : partial_texts(partial)) {
        if (auto lit = logic::parse_literal(text)) {
            available.emplace(*lit, NodeId::intermediate(k));
        }
    }

    // Literals from which the goal is reachable through context rules.
    std::set<Literal> relevant;
    if (goal) {
        relevant.insert(*goal);
        bool grew = true;
        while (grew) {
            grew = false;
            for (auto const& [id, rule] : rules) {
                if (relevant.count(rule.consequent) == 0) {
                    continue;
                }
                for (auto const& a : rule.antecedents) {
                    grew = relevant.insert(a).second || grew;
                }
            }
        }
    }

    std::vector<Candidate> concluding;
    std::vector<Candidate> toward;
    std::vector<Candidate> other;

    if (goal) {
        for (std::uint32_t k = 1; k <= context.size(); ++k) {
            if (auto lit = logic::parse_literal(context[k - 1]); lit && *lit == *goal) {
                concluding.push_back({StepText{{NodeId::sent(k)}, NodeId::hypothesis(), std::nullopt}, 1.0});
                break;
            }
        }
    }

    auto const fresh = NodeId::intermediate(next_int(partial));
    for (auto const& [rule_id, rule] : rules) {
        StepText step;
        step.premises.push_back(rule_id);
        bool fires = true;
        for (auto const& a : rule.antecedents) {
            auto it = available.find(a);
            if (it == available.end()) {
                fires = false;
                break;
            }
            step.premises.push_back(it->second);
        }
        if (!fires) {
            continue;
        }
        std::sort(step.premises.begin(), step.premises.end());
        step.premises.erase(std::unique(step.premises.begin(), step.premises.end()), step.premises.end());
        if (goal && rule.consequent == *goal) {
            step.conclusion = NodeId::hypothesis();
            concluding.push_back({std::move(step), 1.0});
            continue;
        }
        if (available.count(rule.consequent) != 0) {
            continue;
        }
        step.conclusion = fresh;
        step.conclusion_text = logic::render(rule.consequent);
        if (relevant.count(rule.consequent) != 0) {
            toward.push_back({std::move(step), 1.0});
        } else {
            other.push_back({std::move(step), 1.0});
        }
    }

    std::vector<Candidate> out;
    for (auto* group : {&concluding, &toward, &other}) {
        for (auto& c : *group) {
            if (out.size() >= n) {
                return out;
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

double ExactVerifier::score(std::vector<std::string> const& premises, std::string const& conclusion)
{
    auto target = logic::parse_literal(conclusion);
    if (!target || premises.empty()) {
        return 0.0;
    }
    auto key = normalize_sentence(conclusion);
    std::vector<logic::Sentence> parsed;
    for (auto const& p : premises) {
        if (normalize_sentence(p) == key) {
            return 0.0;  // copies a premise
        }
        auto s = logic::parse_sentence(p);
        if (!s) {
            return 0.0;
        }
        parsed.push_back(std::move(*s));
    }
    auto derived = logic::apply_once(parsed);
    return derived && *derived == *target ? 1.0 : 0.0;
}

double ExactVerifier::score_hypothesis_step(std::vector<std::string> const& premises,
                                            std::string const& hypothesis)
{
    if (premises.size() == 1) {
        auto given = logic::parse_literal(premises.front());
        auto goal = logic::parse_literal(hypothesis);
        if (given && goal && *given == *goal) {
            return 1.0;
        }
    }
    return score(premises, hypothesis);
}

// ---------------------------------------------------------------------------

NoisyProver::NoisyProver(double drop, double inject, std::uint64_t seed)
    : m_drop(drop), m_inject(inject), m_rng(seed)
{}

std::vector<Candidate> NoisyProver::generate(std::string const& hypothesis,
                                             std::vector<std::string> const& context,
                                             LinearProof const& partial,
                                             std::size_t n)
{
    auto all = m_exact.generate(hypothesis, context, partial, context.size() + partial.steps.size() + n);
    std::bernoulli_distribution drop(m_drop);
    std::vector<Candidate> out;
    for (auto& c : all) {
        if (!drop(m_rng)) {
            out.push_back(std::move(c));
        }
    }
    if (std::bernoulli_distribution(m_inject)(m_rng)) {
        std::vector<NodeId> pool;
        for (std::uint32_t k = 1; k <= context.size(); ++k) {
            pool.push_back(NodeId::sent(k));
        }
        for (auto const& [k, text] : partial_texts(partial)) {
            pool.push_back(NodeId::intermediate(k));
        }
        if (!pool.empty()) {
            std::size_t count = std::min<std::size_t>(pool.size(), 1 + std::uniform_int_distribution<int>(0, 1)(m_rng));
            std::shuffle(pool.begin(), pool.end(), m_rng);
            StepText fake;
            fake.premises.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
            std::sort(fake.premises.begin(), fake.premises.end());
            fake.conclusion = NodeId::hypothesis();
            double p = std::uniform_real_distribution<double>(0.5, 1.0)(m_rng);
            out.push_back({std::move(fake), p});
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](Candidate const& a, Candidate const& b) { return a.score > b.score; });
    if (out.size() > n) {
        out.resize(n);
    }
    return out;
}

// ---------------------------------------------------------------------------

OracleProver::OracleProver(std::unique_ptr<StepSource> inner, ProofTree gold)
    : m_inner(std::move(inner)), m_gold(std::move(gold))
{}

std::vector<Candidate> OracleProver::generate(std::string const& hypothesis,
                                              std::vector<std::string> const& context,
                                              LinearProof const& partial,
                                              std::size_t n)
{
    std::map<std::string, std::uint32_t> partial_by_text;
    for (auto const& [k, text] : partial_texts(partial)) {
        partial_by_text.emplace(normalize_sentence(text), k);
    }
    std::map<std::uint32_t, std::string> gold_text;
    for (auto const& s : m_gold.steps) {
        if (s.conclusion.is_int() && s.conclusion_text) {
            gold_text[s.conclusion.index] = normalize_sentence(*s.conclusion_text);
        }
    }

    std::vector<Candidate> out;
    std::set<std::string> seen;
    auto const fresh = NodeId::intermediate(next_int(partial));
    for (auto const& g : m_gold.steps) {
        StepText step;
        bool satisfied = true;
        for (auto const& p : g.premises) {
            if (p.is_sent()) {
                satisfied = satisfied && p.index <= context.size();
                step.premises.push_back(p);
                continue;
            }
            auto it = partial_by_text.find(gold_text[p.index]);
            if (it == partial_by_text.end()) {
                satisfied = false;
                break;
            }
            step.premises.push_back(NodeId::intermediate(it->second));
        }
        if (!satisfied) {
            continue;
        }
        if (g.conclusion.is_int()) {
            if (partial_by_text.count(gold_text[g.conclusion.index]) != 0) {
                continue;
            }
            step.conclusion = fresh;
            step.conclusion_text = g.conclusion_text;
        } else {
            step.conclusion = NodeId::hypothesis();
        }
        std::sort(step.premises.begin(), step.premises.end());
        seen.insert(step_key(step.premises, conclusion_key(step)));
        out.push_back({std::move(step), 1.0});
    }

    for (auto& c : m_inner->generate(hypothesis, context, partial, n)) {
        if (seen.insert(step_key(c.step.premises, conclusion_key(c.step))).second) {
            out.push_back(std::move(c));
        }
    }
    return out;
}

OracleVerifier::OracleVerifier(std::unique_ptr<StepScorer> inner,
                               ProofTree const& gold,
                               std::string const& hypothesis,
                               std::vector<std::string> const& context)
    : m_inner(std::move(inner))
{
    for (auto const& s : gold.steps) {
        auto premises = premise_sentences(s, context, gold);
        std::string conclusion = s.conclusion.is_hypothesis() ? hypothesis : s.conclusion_text.value_or("");
        m_gold.insert(key_of(premises, conclusion));
    }
}

OracleVerifier::Key OracleVerifier::key_of(std::vector<std::string> const& premises,
                                           std::string const& conclusion)
{
    std::vector<std::string> norm;
    norm.reserve(premises.size());
    for (auto const& p : premises) {
        norm.push_back(normalize_sentence(p));
    }
    std::sort(norm.begin(), norm.end());
    return {norm, normalize_sentence(conclusion)};
}

bool OracleVerifier::is_gold(std::vector<std::string> const& premises, std::string const& conclusion) const
{
    return m_gold.count(key_of(premises, conclusion)) != 0;
}

double OracleVerifier::score(std::vector<std::string> const& premises, std::string const& conclusion)
{
    return is_gold(premises, conclusion) ? 1.0 : m_inner->score(premises, conclusion);
}

double OracleVerifier::score_hypothesis_step(std::vector<std::string> const& premises,
                                             std::string const& hypothesis)
{
    return is_gold(premises, hypothesis) ? 1.0 : m_inner->score_hypothesis_step(premises, hypothesis);
}

}  // namespace entail
