// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "entail/batch.hpp"
#include "entail/bm25.hpp"
#include "entail/bridge.hpp"
#include "entail/errors.hpp"
#include "entail/eval.hpp"
#include "entail/logic.hpp"
#include "entail/proof_graph.hpp"
#include "entail/step_sources.hpp"
#include "entail/text.hpp"
#include "entail/verifier_data.hpp"
#include "support/fixtures.hpp"

using namespace entail;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and budgets.
constexpr double kLooplessBudgetS = 30.0;
constexpr double kOracleBudgetS = 120.0;
constexpr double kSearchGapPoints = 5.0;
constexpr double kGoldenTol = 1e-12;
constexpr double kBm25Tol = 1e-12;

int g_failures = 0;

void report(bool ok, std::string const& name, std::string const& detail)
{
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    g_failures += ok ? 0 : 1;
}

double seconds_since(Clock::time_point t)
{
    return std::chrono::duration<double>(Clock::now() - t).count();
}

int jobs()
{
    return static_cast<int>(std::max(4u, std::thread::hardware_concurrency()));
}

std::string fmt(double v, int prec = 2)
{
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(prec);
    s << v;
    return s.str();
}

// --- proof graph fuzzing ----------------------------------------------------

// Node -> premises of its active inbound step, read off the step list.
std::vector<std::vector<std::size_t>> inbound_premises(ProofGraph const& g)
{
    std::vector<std::vector<std::size_t>> in(g.size());
    std::vector<int> count(g.size(), 0);
    for (auto const& s : g.steps()) {
        if (s.active) {
            in[s.conclusion] = s.premises;
            ++count[s.conclusion];
        }
    }
    for (int c : count) {
        if (c > 1) {
            throw std::logic_error("node with two active inbound steps");
        }
    }
    return in;
}

bool has_cycle(std::vector<std::vector<std::size_t>> const& in)
{
    std::vector<int> colour(in.size(), 0);
    std::function<bool(std::size_t)> visit = [&](std::size_t n) {
        colour[n] = 1;
        for (auto p : in[n]) {
            if (colour[p] == 1 || (colour[p] == 0 && visit(p))) {
                return true;
            }
        }
        colour[n] = 2;
        return false;
    };
    for (std::size_t n = 0; n < in.size(); ++n) {
        if (colour[n] == 0 && visit(n)) {
            return true;
        }
    }
    return false;
}

double bottom_up(ProofGraph const& g,
                 std::vector<std::vector<std::size_t>> const& in,
                 std::size_t n,
                 std::map<std::size_t, double>& memo)
{
    if (g.node(n).role == NodeRole::Fact) {
        return 1.0;
    }
    if (in[n].empty()) {
        return 0.0;
    }
    if (auto it = memo.find(n); it != memo.end()) {
        return it->second;
    }
    double v = 1.0;
    for (auto const& s : g.steps()) {
        if (s.active && s.conclusion == n) {
            v = s.score;
        }
    }
    for (auto p : in[n]) {
        v = std::min(v, bottom_up(g, in, p, memo));
    }
    return memo[n] = v;
}

struct GraphFuzzStats {
    std::size_t sequences = 0;
    std::size_t mutations = 0;
    std::size_t adversarial = 0;
    std::size_t cyclic = 0;
    std::size_t inconsistent = 0;
    std::size_t pairs = 0;
    std::size_t monotone_violations = 0;
    double seconds = 0.0;
};

GraphFuzzStats fuzz_graphs(std::size_t sequences)
{
    GraphFuzzStats st;
    auto start = Clock::now();
    std::mt19937_64 rng(2024);
    std::vector<std::string> ctx{"f1.", "f2.", "f3.", "f4.", "f5."};
    std::vector<std::string> names{"a.", "b.", "c.", "d.", "e.", "f.", "g."};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t seq = 0; seq < sequences; ++seq) {
        ProofGraph g("h.", ctx);
        int len = 5 + static_cast<int>(rng() % 26);
        for (int s = 0; s < len; ++s) {
            auto in = inbound_premises(g);
            std::vector<std::size_t> prem;
            StepConclusion concl = StepConclusion::of_hypothesis();
            std::vector<std::size_t> inters;
            for (std::size_t n = g.hypothesis_index() + 1; n < g.size(); ++n) {
                inters.push_back(n);
            }
            bool adversarial = !inters.empty() && rng() % 3 == 0;
            if (adversarial) {
                // Conclude an intermediate from one of its own descendants.
                auto target = inters[rng() % inters.size()];
                std::vector<std::size_t> below;
                for (auto n : inters) {
                    if (g.predecessors(n).count(target) != 0 && n != target) {
                        below.push_back(n);
                    }
                }
                prem.push_back(below.empty() ? target : below[rng() % below.size()]);
                if (rng() % 2 == 0) {
                    prem.push_back(rng() % g.num_facts());
                }
                concl = StepConclusion::of_sentence(g.node(target).text);
                ++st.adversarial;
            } else {
                std::size_t np = 1 + rng() % 3;
                for (std::size_t k = 0; k < np; ++k) {
                    auto p = rng() % g.size();
                    if (p != g.hypothesis_index() && std::find(prem.begin(), prem.end(), p) == prem.end()) {
                        prem.push_back(p);
                    }
                }
                if (prem.empty()) {
                    prem.push_back(0);
                }
                if (rng() % 5 != 0) {
                    concl = StepConclusion::of_sentence(names[rng() % names.size()]);
                }
            }
            double score = rng() % 4 == 0 ? 1.0 : unit(rng);
            try {
                g.execute_step(prem, concl, score);
            } catch (InvalidStep const&) {
            }
            ++st.mutations;

            in = inbound_premises(g);
            if (has_cycle(in)) {
                ++st.cyclic;
                continue;
            }
            std::map<std::size_t, double> memo;
            for (std::size_t n = 0; n < g.size(); ++n) {
                if (g.node(n).score != bottom_up(g, in, n, memo)) {
                    ++st.inconsistent;
                }
            }
            for (std::size_t v = 0; v < g.size(); ++v) {
                // Every node below v supports it, so it scores at least as high.
                std::vector<std::size_t> stack(in[v].begin(), in[v].end());
                std::set<std::size_t> seen;
                while (!stack.empty()) {
                    auto u = stack.back();
                    stack.pop_back();
                    if (!seen.insert(u).second) {
                        continue;
                    }
                    ++st.pairs;
                    if (g.node(v).score > g.node(u).score) {
                        ++st.monotone_violations;
                    }
                    stack.insert(stack.end(), in[u].begin(), in[u].end());
                }
            }
        }
        ++st.sequences;
    }
    st.seconds = seconds_since(start);
    return st;
}

// --- pipelines ---------------------------------------------------------------

std::string sentence_of(NodeId id, std::vector<std::string> const& ctx, LinearProof const& proof, std::string const& target)
{
    if (id.is_sent()) {
        return ctx.at(id.index - 1);
    }
    if (id.is_hypothesis()) {
        return target;
    }
    for (auto const& s : proof.steps) {
        if (s.conclusion == id && s.conclusion_text) {
            return *s.conclusion_text;
        }
    }
    return {};
}

// Steps whose conclusion restates one of their premises. A one-step proof of
// a hypothesis that is itself a given fact is the gold answer, not a copy.
std::size_t premise_copies(LinearProof const& proof, std::vector<std::string> const& ctx, std::string const& target)
{
    std::size_t n = 0;
    for (auto const& s : proof.steps) {
        auto c = normalize_sentence(sentence_of(s.conclusion, ctx, proof, target));
        bool restated_fact = s.conclusion.is_hypothesis() && proof.steps.size() == 1 && s.premises.size() == 1;
        for (auto p : s.premises) {
            if (normalize_sentence(sentence_of(p, ctx, proof, target)) == c && !restated_fact) {
                ++n;
                break;
            }
        }
    }
    return n;
}

void oracle_pipeline()
{
    auto start = Clock::now();
    DatasetConfig dc;
    dc.n = 500;
    dc.depths = {0, 1, 2, 3};
    dc.context_size = 25;
    dc.seed = 1;
    auto data = make_dataset(dc);
    BatchConfig cfg;
    cfg.jobs = jobs();
    cfg.search.seed = 1;
    auto preds = run_batch(data, builtin_factory({}), cfg);
    EvalOptions opt;
    opt.fit_classifier = true;
    auto rep = evaluate(data, preds, opt);
    double secs = seconds_since(start);
    double answer = rep.depth_breakdown.empty() ? 0.0 : rep.depth_breakdown.back().answer_accuracy;
    bool ok = rep.aggregate.overall_allcorrect == 100.0 && answer == 100.0 && secs < kOracleBudgetS && rep.missing.empty();
    report(ok, "oracle pipeline",
           "n=" + std::to_string(data.size()) + " overall_allcorrect=" + fmt(rep.aggregate.overall_allcorrect) +
               "% answer_accuracy=" + fmt(answer) + "% time=" + fmt(secs) + "s (need 100%, 100%, <" +
               fmt(kOracleBudgetS, 0) + "s)");

    // Premise copies in emitted proofs, feeding the anti-hallucination line.
    std::size_t copies = 0;
    std::size_t steps = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto const& inst = data[i];
        auto check = [&](Attempt const& a, std::string const& target) {
            if (a.proof) {
                copies += premise_copies(*a.proof, inst.context, target);
                steps += a.proof->steps.size();
            }
        };
        check(preds[i].hypothesis, inst.hypothesis);
        if (preds[i].negation) {
            check(*preds[i].negation, logic::negate(inst.hypothesis));
        }
    }

    // Verifier contract on generated fixtures.
    DatasetConfig fc;
    fc.n = 100;
    fc.depths = {2, 3};
    fc.answer_weights = {1, 0, 0};
    fc.context_size = 25;
    fc.seed = 77;
    auto fixtures = make_dataset(fc);
    ExactVerifier verifier;
    std::size_t fixture_failures = 0;
    std::size_t probes = 0;
    for (auto const& inst : fixtures) {
        auto pos = extract_positives(*inst.gold_proof, inst.context, inst.proved_sentence());
        auto const& step = pos.front();
        ++probes;
        fixture_failures += verifier.score(step.premises, step.conclusion) == 1.0 ? 0 : 1;
        for (auto const& p : step.premises) {
            ++probes;
            fixture_failures += verifier.score(step.premises, p) == 0.0 ? 0 : 1;
        }
        ++probes;
        fixture_failures += verifier.score(step.premises, inst.hypothesis) == 0.0 ? 0 : 1;
        ++probes;
        fixture_failures += verifier.score(step.premises, logic::negate(step.conclusion)) == 0.0 ? 0 : 1;
    }
    report(fixture_failures == 0 && copies == 0 && fixtures.size() == 100, "anti-hallucination",
           std::to_string(fixtures.size()) + " fixtures, " + std::to_string(probes) + " verifier probes, " +
               std::to_string(fixture_failures) + " wrong; " + std::to_string(copies) + " premise-copy steps in " +
               std::to_string(steps) + " emitted oracle-pipeline steps");
}

void search_beats_greedy()
{
    DatasetConfig dc;
    dc.n = 200;
    dc.depths = {1, 2, 3};
    dc.answer_weights = {1, 1, 0};
    dc.context_size = 25;
    dc.seed = 1;
    auto data = make_dataset(dc);
    BuiltinSources spec;
    spec.prover = "noisy";
    spec.drop = 0.3;
    spec.inject = 0.3;
    spec.seed = 1;
    auto factory = builtin_factory(spec);
    BatchConfig cfg;
    cfg.jobs = jobs();
    cfg.search.seed = 1;
    auto with = run_batch(data, factory, cfg);
    cfg.search.search = false;
    auto without = run_batch(data, factory, cfg);
    auto a = evaluate(data, with).aggregate.overall_allcorrect;
    auto b = evaluate(data, without).aggregate.overall_allcorrect;
    std::size_t lower = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        lower += with[i].hypothesis.proof_score < without[i].hypothesis.proof_score ? 1 : 0;
        if (with[i].negation && without[i].negation) {
            lower += with[i].negation->proof_score < without[i].negation->proof_score ? 1 : 0;
        }
    }
    report(a - b >= kSearchGapPoints && lower == 0, "search beats greedy",
           "overall_allcorrect search=" + fmt(a) + "% no-search=" + fmt(b) + "% gap=" + fmt(a - b) + " (need >= " +
               fmt(kSearchGapPoints, 1) + "); hypothesis score lower under search on " + std::to_string(lower) +
               " attempts");
}

void metric_goldens()
{
    std::size_t wrong = 0;
    for (auto const& g : fixtures::metric_goldens()) {
        auto s = score_example(parse_proof(g.predicted, fixtures::kGoldenContext),
                               parse_proof(g.gold, fixtures::kGoldenContext));
        bool ok = std::abs(s.leaves_f1 - g.leaves_f1) <= kGoldenTol && std::abs(s.steps_f1 - g.steps_f1) <= kGoldenTol &&
                  std::abs(s.interm_f1 - g.interm_f1) <= kGoldenTol && s.leaves_allcorrect == (g.leaves_f1 == 1.0) &&
                  s.steps_allcorrect == (g.steps_f1 == 1.0) && s.interm_allcorrect == (g.interm_f1 == 1.0) &&
                  s.overall_allcorrect == g.overall;
        if (!ok) {
            ++wrong;
            std::cout << "  golden mismatch: " << g.name << std::endl;
        }
    }
    auto half = score_example(parse_proof("sent1 & sent2 -> hypothesis;", 3), parse_proof("sent1 & sent3 -> hypothesis;", 3));
    bool half_ok = half.leaves_f1 == 0.5 && !half.leaves_allcorrect;

    std::mt19937_64 rng(1000);
    std::size_t violations = 0;
    std::size_t overall = 0;
    for (int i = 0; i < 1000; ++i) {
        auto gold = fixtures::random_proof(rng, 5, 4, 3);
        auto pred = i % 3 == 0 ? gold : fixtures::random_proof(rng, 5, 4, 3);
        auto s = score_example(pred, gold);
        overall += s.overall_allcorrect ? 1 : 0;
        if (s.overall_allcorrect && !(s.leaves_allcorrect && s.steps_allcorrect && s.interm_allcorrect)) {
            ++violations;
        }
        if (s.leaves_allcorrect != (s.leaves_f1 == 1.0) || s.steps_allcorrect != (s.steps_f1 == 1.0) ||
            s.interm_allcorrect != (s.interm_f1 == 1.0)) {
            ++violations;
        }
    }
    report(wrong == 0 && half_ok && violations == 0, "metric goldens",
           std::to_string(fixtures::metric_goldens().size() - wrong) + "/" +
               std::to_string(fixtures::metric_goldens().size()) + " goldens exact, leaves-F1 0.5 fixture " +
               (half_ok ? "ok" : "wrong") + ", implication violations " + std::to_string(violations) +
               " over 1000 pairs (" + std::to_string(overall) + " fully correct)");
}

std::string dump_steps(std::vector<LabeledStep> const& steps)
{
    std::string out;
    for (auto const& s : steps) {
        out += labeled_step_to_json(s).dump() + "\n";
    }
    return out;
}

void bm25_and_negatives()
{
    Bm25Index idx({
        "Solar energy is energy from the sun.",
        "The sun heats the earth and the oceans.",
        "Wind energy and solar panels produce electricity.",
        "Plants use light to make food.",
        "Solar cells convert solar radiation into electric energy.",
    });
    std::vector<double> expected{1.2921476433530112, 0.0, 1.090383725620149, 0.0, 1.234223871242965};
    auto s = idx.scores("solar energy");
    bool scores_ok = s.size() == expected.size();
    for (std::size_t i = 0; scores_ok && i < s.size(); ++i) {
        scores_ok = std::abs(s[i] - expected[i]) <= kBm25Tol;
    }
    auto top = bm25_topk(idx, "solar energy", 5);
    std::vector<std::size_t> order;
    for (auto const& [doc, score] : top) {
        order.push_back(static_cast<std::size_t>(
            std::find(idx.documents().begin(), idx.documents().end(), doc) - idx.documents().begin()));
    }
    bool order_ok = order == std::vector<std::size_t>{0, 4, 2, 1, 3};

    DatasetConfig dc;
    dc.n = 300;
    dc.context_size = 25;
    dc.seed = 3;
    auto data = make_dataset(dc);
    VerifierDataConfig vc;
    vc.seed = 11;
    vc.weights = {1, 1, 1, 1};
    auto first = dump_steps(make_verifier_data(data, vc));
    auto again = dump_steps(make_verifier_data(data, vc));
    vc.jobs = jobs();
    auto parallel = dump_steps(make_verifier_data(data, vc));
    bool det = first == again && first == parallel && !first.empty();
    report(scores_ok && order_ok && det, "bm25 and negatives",
           std::string("fixture scores ") + (scores_ok ? "match" : "differ") + ", ranking " +
               (order_ok ? "0,4,2,1,3" : "wrong") + "; negatives " + std::to_string(first.size()) + " bytes " +
               (det ? "identical" : "differ") + " across reruns and " + std::to_string(jobs()) + " threads");
}

void dsl_round_trip()
{
    auto start = Clock::now();
    std::mt19937_64 rng(10000);
    std::size_t mismatches = 0;
    std::vector<std::string> valid;
    for (int i = 0; i < 10000; ++i) {
        auto p = fixtures::random_proof(rng, 10);
        auto text = serialize_proof(p);
        auto back = parse_proof(text, 10);
        if (back != canonicalize(p) || serialize_proof(back) != text) {
            ++mismatches;
        }
        if (i < 200) {
            valid.push_back(text);
        }
    }

    char const* atoms[] = {"sent1", "sent2", "sent10", "int1", "int2", "hypothesis", " & ", " -> ", ":", ";",
                           " ",     "x",     "sent0",  "int",  "->",   "&",          "\n",  "int99", "sent-1", "\t"};
    std::size_t panics = 0;
    std::size_t accepted = 0;
    constexpr std::size_t kFuzz = 1'000'000;
    for (std::size_t i = 0; i < kFuzz; ++i) {
        std::string s;
        switch (i % 3) {
        case 0: {
            auto len = rng() % 14;
            for (std::size_t k = 0; k < len; ++k) {
                s += atoms[rng() % std::size(atoms)];
            }
            break;
        }
        case 1: {
            auto len = rng() % 40;
            for (std::size_t k = 0; k < len; ++k) {
                s += static_cast<char>(rng() % 256);
            }
            break;
        }
        default: {
            s = valid[rng() % valid.size()];
            auto edits = 1 + rng() % 3;
            for (std::size_t e = 0; e < edits && !s.empty(); ++e) {
                auto pos = rng() % s.size();
                switch (rng() % 3) {
                case 0: s.erase(pos, 1 + rng() % 4); break;
                case 1: s.insert(pos, atoms[rng() % std::size(atoms)]); break;
                default: s[pos] = static_cast<char>(rng() % 128); break;
                }
            }
        }
        }
        try {
            parse_proof(s, 10);
            ++accepted;
        } catch (ProofFormatError const&) {
        } catch (...) {
            ++panics;
        }
    }
    report(mismatches == 0 && panics == 0, "dsl round-trip",
           "10000 proofs, " + std::to_string(mismatches) + " mismatches; " + std::to_string(kFuzz) +
               " fuzzed inputs, " + std::to_string(panics) + " panics (" + std::to_string(accepted) +
               " accepted); time=" + fmt(seconds_since(start)) + "s");
}

void bridge_conformance()
{
    auto rep = check_bridge(STUB_BRIDGE, std::chrono::milliseconds(5000), 200, 1);
    std::size_t passed = 0;
    for (auto const& c : rep.checks) {
        passed += c.passed ? 1 : 0;
    }
    std::cout << (rep.passed() ? "PASS " : "FAIL ") << "[secondary] bridge conformance: " << passed << "/"
              << rep.checks.size() << " checks against the stub bridge" << std::endl;
}

}  // namespace

int main()
{
    auto graph = fuzz_graphs(10000);
    report(graph.cyclic == 0 && graph.seconds < kLooplessBudgetS && graph.sequences == 10000, "looplessness",
           std::to_string(graph.sequences) + " sequences, " + std::to_string(graph.mutations) + " mutations (" +
               std::to_string(graph.adversarial) + " ancestor-concluding), " + std::to_string(graph.cyclic) +
               " cyclic states, time=" + fmt(graph.seconds) + "s (<" + fmt(kLooplessBudgetS, 0) + "s)");
    report(graph.inconsistent == 0, "score consistency",
           std::to_string(graph.inconsistent) + " nodes differ from bottom-up recomputation after " +
               std::to_string(graph.mutations) + " mutations");
    report(graph.monotone_violations == 0 && graph.pairs > 0, "monotonicity",
           std::to_string(graph.monotone_violations) + " violations over " + std::to_string(graph.pairs) +
               " predecessor pairs");
    oracle_pipeline();
    search_beats_greedy();
    metric_goldens();
    bm25_and_negatives();
    dsl_round_trip();
    bridge_conformance();
    return g_failures;
}
