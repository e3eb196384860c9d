#include "entail/proof_graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "entail/errors.hpp"
#include "entail/text.hpp"

namespace entail {

double node_score(double step_score, std::span<const double> child_scores)
{
    auto check = [](double v) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("score " + std::to_string(v) + " outside [0, 1]");
        }
    };
    if (child_scores.empty()) {
        throw DomainError("a step needs at least one premise score");
    }
    check(step_score);
    double s = step_score;
    for (double c : child_scores) {
        check(c);
        s = std::min(s, c);
    }
    return s;
}

ProofGraph::ProofGraph(std::string hypothesis, std::vector<std::string> const& context)
    : m_num_facts(context.size())
{
    m_nodes.reserve(context.size() + 8);
    for (auto const& sentence : context) {
        GraphNode n;
        n.role = NodeRole::Fact;
        n.text = sentence;
        n.sentence = normalize_sentence(sentence);
        n.score = 1.0;
        m_fact_sentences.emplace(n.sentence, m_nodes.size());
        m_nodes.push_back(std::move(n));
    }
    GraphNode h;
    h.role = NodeRole::Hypothesis;
    h.text = std::move(hypothesis);
    h.sentence = normalize_sentence(h.text);
    m_by_sentence.emplace(h.sentence, m_nodes.size());
    m_nodes.push_back(std::move(h));
    m_out_steps.resize(m_nodes.size());
}

std::optional<std::size_t> ProofGraph::find_sentence(std::string const& text) const
{
    auto it = m_by_sentence.find(normalize_sentence(text));
    if (it == m_by_sentence.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t ProofGraph::add_intermediate(std::string const& text)
{
    GraphNode n;
    n.role = NodeRole::Intermediate;
    n.text = trim(text);
    n.sentence = normalize_sentence(text);
    std::size_t index = m_nodes.size();
    m_by_sentence.emplace(n.sentence, index);
    m_nodes.push_back(std::move(n));
    m_out_steps.emplace_back();
    return index;
}

void ProofGraph::attach_step(std::size_t step_index)
{
    for (auto p : m_steps[step_index].premises) {
        m_out_steps[p].push_back(step_index);
    }
}

void ProofGraph::detach_step(std::size_t step_index)
{
    auto& step = m_steps[step_index];
    step.active = false;
    for (auto p : step.premises) {
        auto& out = m_out_steps[p];
        out.erase(std::remove(out.begin(), out.end(), step_index), out.end());
    }
}

double ProofGraph::recompute(std::size_t node) const
{
    auto const& n = m_nodes[node];
    if (n.role == NodeRole::Fact) {
        return 1.0;
    }
    if (!n.inbound_step) {
        return 0.0;
    }
    auto const& step = m_steps[*n.inbound_step];
    double s = step.score;
    for (auto p : step.premises) {
        s = std::min(s, m_nodes[p].score);
    }
    return s;
}

ExecutionOutcome ProofGraph::execute_step(std::span<const std::size_t> premises,
                                          StepConclusion const& conclusion,
                                          double step_score,
                                          double min_improvement)
{
    if (premises.empty()) {
        throw InvalidStep("step without premises");
    }
    std::vector<double> child_scores;
    child_scores.reserve(premises.size());
    std::set<std::size_t> distinct;
    for (auto p : premises) {
        if (p >= m_nodes.size()) {
            throw InvalidStep("premise " + std::to_string(p) + " is not in the graph");
        }
        if (p == hypothesis_index()) {
            throw InvalidStep("the hypothesis cannot be a premise");
        }
        if (!distinct.insert(p).second) {
            throw InvalidStep("duplicate premise");
        }
        child_scores.push_back(m_nodes[p].score);
    }
    double tentative = node_score(step_score, child_scores);

    std::optional<std::size_t> target;
    if (conclusion.hypothesis) {
        target = hypothesis_index();
    } else {
        auto key = normalize_sentence(conclusion.text);
        if (key.empty()) {
            throw InvalidStep("empty conclusion");
        }
        if (auto it = m_by_sentence.find(key); it != m_by_sentence.end()) {
            target = it->second;
        } else if (m_fact_sentences.count(key) != 0) {
            throw InvalidStep("conclusion '" + conclusion.text + "' is a given fact");
        }
    }

    if (target) {
        if (!(tentative > m_nodes[*target].score + min_improvement)) {
            return ExecutionOutcome::NoOp;
        }
        // Loop guard; unreachable under the min aggregation.
        if (distinct.count(*target) != 0) {
            return ExecutionOutcome::NoOp;
        }
        auto downstream = successors(*target);
        for (auto p : premises) {
            if (downstream.count(p) != 0) {
                return ExecutionOutcome::NoOp;
            }
        }
    } else if (!(tentative > min_improvement)) {
        return ExecutionOutcome::NoOp;
    }

    bool created = !target;
    std::size_t u = created ? add_intermediate(conclusion.text) : *target;

    StepNode step;
    step.premises.assign(premises.begin(), premises.end());
    step.conclusion = u;
    step.score = step_score;
    m_steps.push_back(std::move(step));
    std::size_t step_index = m_steps.size() - 1;

    if (auto old = m_nodes[u].inbound_step) {
        detach_step(*old);
    }
    attach_step(step_index);
    m_nodes[u].inbound_step = step_index;
    m_nodes[u].score = tentative;

    if (created) {
        return ExecutionOutcome::Created;
    }
    propagate_from(u);
    return ExecutionOutcome::Improved;
}

void ProofGraph::propagate_from(std::size_t node)
{
    auto affected = successors(node);
    if (affected.empty()) {
        return;
    }
    for (auto n : ordered_closure(affected)) {
        m_nodes[n].score = recompute(n);
    }
}

std::set<std::size_t> ProofGraph::successors(std::size_t node) const
{
    std::set<std::size_t> seen;
    std::deque<std::size_t> queue{node};
    while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        for (auto s : m_out_steps[cur]) {
            auto next = m_steps[s].conclusion;
            if (seen.insert(next).second) {
                queue.push_back(next);
            }
        }
    }
    return seen;
}

std::set<std::size_t> ProofGraph::predecessors(std::size_t node) const
{
    std::set<std::size_t> seen;
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
        auto cur = stack.back();
        stack.pop_back();
        auto const& in = m_nodes[cur].inbound_step;
        if (!in) {
            continue;
        }
        for (auto p : m_steps[*in].premises) {
            if (seen.insert(p).second) {
                stack.push_back(p);
            }
        }
    }
    return seen;
}

std::vector<std::size_t> ProofGraph::topological_order() const
{
    std::set<std::size_t> all;
    for (std::size_t i = 0; i < m_nodes.size(); ++i) {
        all.insert(i);
    }
    return ordered_closure(all);
}

// Depth-first post-order over inbound premises, restricted to `members`.
std::vector<std::size_t> ProofGraph::ordered_closure(std::set<std::size_t> const& members) const
{
    std::vector<std::uint8_t> state(m_nodes.size(), 0);  // 0 new, 1 open, 2 done
    std::vector<std::size_t> order;
    order.reserve(members.size());
    std::function<void(std::size_t)> visit = [&](std::size_t n) {
        if (state[n] != 0) {
            return;
        }
        state[n] = 1;
        if (auto in = m_nodes[n].inbound_step) {
            for (auto p : m_steps[*in].premises) {
                visit(p);
            }
        }
        state[n] = 2;
        if (members.count(n) != 0) {
            order.push_back(n);
        }
    };
    for (auto n : members) {
        visit(n);
    }
    return order;
}

bool ProofGraph::is_acyclic() const
{
    std::vector<std::uint8_t> state(m_nodes.size(), 0);
    std::function<bool(std::size_t)> visit = [&](std::size_t n) {
        if (state[n] == 1) {
            return false;
        }
        if (state[n] == 2) {
            return true;
        }
        state[n] = 1;
        if (auto in = m_nodes[n].inbound_step) {
            for (auto p : m_steps[*in].premises) {
                if (!visit(p)) {
                    return false;
                }
            }
        }
        state[n] = 2;
        return true;
    };
    for (std::size_t n = 0; n < m_nodes.size(); ++n) {
        if (!visit(n)) {
            return false;
        }
    }
    return true;
}

std::string ProofGraph::fingerprint(std::span<const std::size_t> intermediates) const
{
    std::vector<std::string> sentences;
    sentences.reserve(intermediates.size());
    for (auto n : intermediates) {
        sentences.push_back(m_nodes[n].sentence);
    }
    std::sort(sentences.begin(), sentences.end());
    std::string out;
    for (auto const& s : sentences) {
        out += s;
        out += '\n';
    }
    return out;
}

std::optional<PartialProof> ProofGraph::sample_partial_proof(std::set<std::string> const& explored,
                                                             std::mt19937_64& rng,
                                                             std::size_t max_retries) const
{
    std::vector<std::size_t> order;
    {
        auto topo = topological_order();
        for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
            if (m_nodes[*it].role == NodeRole::Intermediate) {
                order.push_back(*it);
            }
        }
    }
    std::bernoulli_distribution coin(0.5);
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(max_retries, 1); ++attempt) {
        std::set<std::size_t> included;
        std::set<std::size_t> visited;
        for (auto n : order) {
            if (!visited.insert(n).second) {
                continue;
            }
            if (!coin(rng)) {
                continue;
            }
            included.insert(n);
            for (auto p : predecessors(n)) {
                if (m_nodes[p].role == NodeRole::Intermediate) {
                    included.insert(p);
                    visited.insert(p);
                }
            }
        }
        PartialProof partial;
        partial.intermediates.assign(included.begin(), included.end());
        partial.fingerprint = fingerprint(partial.intermediates);
        if (explored.count(partial.fingerprint) == 0) {
            return partial;
        }
    }
    return std::nullopt;
}

LinearProof ProofGraph::render_nodes(std::vector<std::size_t> const& ordered,
                                     std::vector<std::size_t>* node_of_int) const
{
    std::unordered_map<std::size_t, std::uint32_t> local;
    LinearProof proof;
    for (auto n : ordered) {
        auto const& node = m_nodes[n];
        auto const& step = m_steps[*node.inbound_step];
        StepText s;
        for (auto p : step.premises) {
            if (p < m_num_facts) {
                s.premises.push_back(NodeId::sent(static_cast<std::uint32_t>(p + 1)));
            } else {
                s.premises.push_back(NodeId::intermediate(local.at(p)));
            }
        }
        std::sort(s.premises.begin(), s.premises.end());
        if (node.role == NodeRole::Hypothesis) {
            s.conclusion = NodeId::hypothesis();
        } else {
            auto k = static_cast<std::uint32_t>(local.size() + 1);
            local.emplace(n, k);
            s.conclusion = NodeId::intermediate(k);
            s.conclusion_text = node.text;
            if (node_of_int != nullptr) {
                node_of_int->push_back(n);
            }
        }
        proof.steps.push_back(std::move(s));
    }
    return proof;
}

RenderedProof ProofGraph::render(PartialProof const& partial) const
{
    std::set<std::size_t> members(partial.intermediates.begin(), partial.intermediates.end());
    RenderedProof out;
    out.proof = render_nodes(ordered_closure(members), &out.node_of_int);
    return out;
}

ProofTree ProofGraph::extract_proof() const
{
    auto h = hypothesis_index();
    if (!m_nodes[h].inbound_step) {
        throw NoProof("the hypothesis has no proof");
    }
    std::set<std::size_t> members{h};
    for (auto p : predecessors(h)) {
        if (m_nodes[p].role != NodeRole::Fact) {
            members.insert(p);
        }
    }
    return render_nodes(ordered_closure(members), nullptr);
}

nlohmann::json ProofGraph::to_json() const
{
    auto id_of = [&](std::size_t n) {
        if (n < m_num_facts) {
            return NodeId::sent(static_cast<std::uint32_t>(n + 1)).str();
        }
        if (n == hypothesis_index()) {
            return NodeId::hypothesis().str();
        }
        return "node" + std::to_string(n - m_num_facts);
    };
    auto nodes = nlohmann::json::array();
    for (std::size_t n = 0; n < m_nodes.size(); ++n) {
        nodes.push_back({{"id", id_of(n)}, {"sentence", m_nodes[n].text}, {"score", m_nodes[n].score}});
    }
    auto steps = nlohmann::json::array();
    for (auto const& s : m_steps) {
        if (!s.active) {
            continue;
        }
        auto premises = nlohmann::json::array();
        for (auto p : s.premises) {
            premises.push_back(id_of(p));
        }
        steps.push_back({{"premises", premises}, {"conclusion", id_of(s.conclusion)}, {"score", s.score}});
    }
    return {{"nodes", nodes}, {"steps", steps}};
}

}  // namespace entail
