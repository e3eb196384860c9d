#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>

#include "entail/errors.hpp"
#include "entail/eval.hpp"
#include "support/fixtures.hpp"

using namespace entail;
using entail::fixtures::kGoldenContext;
using entail::fixtures::metric_goldens;
using entail::fixtures::random_proof;

TEST(F1Score, Counts)
{
    EXPECT_EQ(f1_score(0, 0, 0), 1.0);
    EXPECT_EQ(f1_score(0, 2, 0), 0.0);
    EXPECT_EQ(f1_score(0, 0, 2), 0.0);
    EXPECT_EQ(f1_score(2, 2, 2), 1.0);
    EXPECT_DOUBLE_EQ(f1_score(1, 2, 2), 0.5);
    EXPECT_DOUBLE_EQ(f1_score(1, 1, 3), 0.5);
}

TEST(MetricGoldens, HandComputedValues)
{
    for (auto const& g : metric_goldens()) {
        SCOPED_TRACE(g.name);
        auto pred = parse_proof(g.predicted, kGoldenContext);
        auto gold = parse_proof(g.gold, kGoldenContext);
        auto s = score_example(pred, gold);
        EXPECT_NEAR(s.leaves_f1, g.leaves_f1, 1e-12);
        EXPECT_NEAR(s.steps_f1, g.steps_f1, 1e-12);
        EXPECT_NEAR(s.interm_f1, g.interm_f1, 1e-12);
        EXPECT_EQ(s.leaves_allcorrect, g.leaves_f1 == 1.0);
        EXPECT_EQ(s.steps_allcorrect, g.steps_f1 == 1.0);
        EXPECT_EQ(s.interm_allcorrect, g.interm_f1 == 1.0);
        EXPECT_EQ(s.overall_allcorrect, g.overall);
    }
}

TEST(MetricGoldens, LeavesHalf)
{
    auto s = score_example(parse_proof("sent1 & sent2 -> hypothesis;", 3), parse_proof("sent1 & sent3 -> hypothesis;", 3));
    EXPECT_DOUBLE_EQ(s.leaves_f1, 0.5);
    EXPECT_FALSE(s.leaves_allcorrect);
}

TEST(Metrics, LeafF1IsSymmetric)
{
    std::mt19937_64 rng(4);
    for (int i = 0; i < 300; ++i) {
        auto a = random_proof(rng, 6, 4, 5);
        auto b = random_proof(rng, 6, 4, 5);
        EXPECT_DOUBLE_EQ(score_example(a, b).leaves_f1, score_example(b, a).leaves_f1);
    }
}

TEST(Metrics, OverallImpliesEveryFamily)
{
    std::mt19937_64 rng(9);
    std::size_t overall = 0;
    for (int i = 0; i < 1000; ++i) {
        auto gold = random_proof(rng, 5, 4, 3);
        auto pred = (i % 3 == 0) ? gold : random_proof(rng, 5, 4, 3);
        auto s = score_example(pred, gold);
        EXPECT_EQ(s.leaves_allcorrect, s.leaves_f1 == 1.0);
        EXPECT_EQ(s.steps_allcorrect, s.steps_f1 == 1.0);
        EXPECT_EQ(s.interm_allcorrect, s.interm_f1 == 1.0);
        if (s.overall_allcorrect) {
            ++overall;
            EXPECT_TRUE(s.leaves_allcorrect && s.steps_allcorrect && s.interm_allcorrect);
        }
    }
    EXPECT_GT(overall, 300u);
}

namespace {

std::map<NodeId, std::set<NodeId>> leaf_sets(LinearProof const& p)
{
    std::map<NodeId, std::set<NodeId>> out;
    for (auto const& s : p.steps) {
        std::set<NodeId> leaves;
        for (auto q : s.premises) {
            if (q.is_sent()) {
                leaves.insert(q);
            } else {
                leaves.insert(out[q].begin(), out[q].end());
            }
        }
        out[s.conclusion] = leaves;
    }
    return out;
}

double jaccard(std::set<NodeId> const& a, std::set<NodeId> const& b)
{
    std::set<NodeId> u = a;
    u.insert(b.begin(), b.end());
    std::size_t inter = a.size() + b.size() - u.size();
    return u.empty() ? 0.0 : static_cast<double>(inter) / static_cast<double>(u.size());
}

// Best total Jaccard over all injective matchings of intermediates.
double best_matching(std::vector<std::set<NodeId>> const& pred, std::vector<std::set<NodeId>> const& gold)
{
    std::vector<bool> used(gold.size(), false);
    std::function<double(std::size_t)> go = [&](std::size_t i) -> double {
        if (i == pred.size()) {
            return 0.0;
        }
        double best = go(i + 1);
        for (std::size_t j = 0; j < gold.size(); ++j) {
            if (!used[j]) {
                used[j] = true;
                best = std::max(best, jaccard(pred[i], gold[j]) + go(i + 1));
                used[j] = false;
            }
        }
        return best;
    };
    return go(0);
}

}  // namespace

TEST(Alignment, GreedyMatchesBruteForceOnFixtures)
{
    for (auto const& g : metric_goldens()) {
        SCOPED_TRACE(g.name);
        auto pred = parse_proof(g.predicted, kGoldenContext);
        auto gold = parse_proof(g.gold, kGoldenContext);
        auto pl = leaf_sets(pred);
        auto gl = leaf_sets(gold);
        std::vector<std::set<NodeId>> pi;
        std::vector<std::set<NodeId>> gi;
        for (auto const& [n, l] : pl) {
            if (n.is_int()) {
                pi.push_back(l);
            }
        }
        for (auto const& [n, l] : gl) {
            if (n.is_int()) {
                gi.push_back(l);
            }
        }
        auto al = align_trees(pred, gold);
        double greedy = 0.0;
        for (auto const& [p, q] : al.pred_to_gold) {
            if (p.is_int()) {
                greedy += jaccard(pl.at(p), gl.at(q));
            }
        }
        EXPECT_NEAR(greedy, best_matching(pi, gi), 1e-12);
    }
}

TEST(Alignment, HypothesisAlwaysPairsWithHypothesis)
{
    auto pred = parse_proof("sent1 & sent2 -> int1: x.; sent3 & int1 -> hypothesis;", 3);
    auto gold = parse_proof("sent1 & sent2 & sent3 -> hypothesis;", 3);
    auto al = align_trees(pred, gold);
    EXPECT_EQ(al.gold_of(NodeId::hypothesis()), NodeId::hypothesis());
    EXPECT_FALSE(al.gold_of(NodeId::intermediate(1)).has_value());
}

TEST(Alignment, CrossingPicksHighestJaccardFirst)
{
    auto pred = parse_proof(metric_goldens()[10].predicted, kGoldenContext);
    auto gold = parse_proof(metric_goldens()[10].gold, kGoldenContext);
    auto al = align_trees(pred, gold);
    EXPECT_EQ(al.gold_of(NodeId::intermediate(1)), NodeId::intermediate(1));
    EXPECT_EQ(al.gold_of(NodeId::intermediate(2)), NodeId::intermediate(2));
}

TEST(Classifier, ReferenceDecisions)
{
    auto c = AnswerClassifier::reference();
    EXPECT_EQ(c.classify(0.9, 0.1), Answer::Proved);
    EXPECT_EQ(c.classify(0.1, 0.9), Answer::Disproved);
    EXPECT_EQ(c.classify(0.0, 0.0), Answer::Unknown);
    EXPECT_EQ(c.classify(0.7, 0.7), Answer::Unknown);
    EXPECT_EQ(classify_answer(c, 1.0, 0.0), Answer::Proved);
}

TEST(Classifier, FitSeparatesCleanScores)
{
    std::vector<std::array<double, 2>> xs;
    std::vector<Answer> ys;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> hi(0.8, 1.0);
    std::uniform_real_distribution<double> lo(0.0, 0.2);
    for (int i = 0; i < 90; ++i) {
        switch (i % 3) {
        case 0: xs.push_back({hi(rng), lo(rng)}); ys.push_back(Answer::Proved); break;
        case 1: xs.push_back({lo(rng), hi(rng)}); ys.push_back(Answer::Disproved); break;
        default: xs.push_back({lo(rng), lo(rng)}); ys.push_back(Answer::Unknown); break;
        }
    }
    auto c = AnswerClassifier::fit(xs, ys);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        EXPECT_EQ(c.classify(xs[i][0], xs[i][1]), ys[i]) << i;
    }
    auto back = AnswerClassifier::from_json(nlohmann::json::parse(c.to_json().dump()));
    EXPECT_EQ(back.weights, c.weights);
    EXPECT_THROW(AnswerClassifier::fit({}, {}), ConfigError);
    EXPECT_THROW(AnswerClassifier::from_json(nlohmann::json::object()), ConfigError);
}

TEST(DepthBreakdown, AbsentBucketsAreLeftOut)
{
    std::vector<DepthRecord> recs{
        {1, Answer::Proved, true, true},
        {1, Answer::Disproved, true, false},
        {3, Answer::Proved, false, false},
        {-1, Answer::Unknown, true, true},
    };
    auto b = breakdown_by_depth(recs);
    ASSERT_EQ(b.size(), 4u);
    EXPECT_EQ(b[0].name, "N/A");
    EXPECT_EQ(b[1].name, "1");
    EXPECT_DOUBLE_EQ(b[1].answer_accuracy, 100.0);
    EXPECT_DOUBLE_EQ(b[1].proof_accuracy, 50.0);
    EXPECT_EQ(b[2].name, "3");
    EXPECT_EQ(b[3].name, "All");
    EXPECT_EQ(b[3].n, 4u);
    EXPECT_DOUBLE_EQ(b[3].answer_accuracy, 75.0);
    EXPECT_DOUBLE_EQ(b[3].proof_accuracy, 50.0);
    EXPECT_TRUE(breakdown_by_depth({}).empty());
}

namespace {

std::vector<TaskInstance> small_gold()
{
    DatasetConfig dc;
    dc.n = 12;
    dc.seed = 8;
    dc.context_size = 20;
    return make_dataset(dc);
}

std::vector<Prediction> perfect(std::vector<TaskInstance> const& gold)
{
    std::vector<Prediction> out;
    for (auto const& g : gold) {
        Prediction p;
        p.id = g.id;
        p.negation = Attempt{};
        Attempt& target = g.answer == Answer::Disproved ? *p.negation : p.hypothesis;
        if (g.gold_proof) {
            target.proof = g.gold_proof;
            target.proof_score = 1.0;
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace

TEST(Evaluate, PerfectPredictions)
{
    auto gold = small_gold();
    auto r = evaluate(gold, perfect(gold));
    EXPECT_EQ(r.aggregate.overall_allcorrect, 100.0);
    EXPECT_TRUE(r.missing.empty());
    EXPECT_TRUE(r.warnings.empty());
    ASSERT_FALSE(r.depth_breakdown.empty());
    EXPECT_EQ(r.depth_breakdown.back().name, "All");
    EXPECT_DOUBLE_EQ(r.depth_breakdown.back().answer_accuracy, 100.0);
    EXPECT_DOUBLE_EQ(r.depth_breakdown.back().proof_accuracy, 100.0);
}

TEST(Evaluate, MissingAndEmptyPredictions)
{
    auto gold = small_gold();
    auto none = evaluate(gold, {});
    EXPECT_EQ(none.aggregate.overall_allcorrect, 0.0);
    EXPECT_EQ(none.aggregate.leaves_f1, 0.0);
    EXPECT_EQ(none.missing.size(), gold.size());
    EXPECT_FALSE(none.warnings.empty());

    auto preds = perfect(gold);
    preds.pop_back();
    auto r = evaluate(gold, preds);
    EXPECT_EQ(r.missing, std::vector<std::string>{gold.back().id});
}

TEST(Evaluate, ReportIsDeterministic)
{
    auto gold = small_gold();
    auto preds = perfect(gold);
    preds[0].hypothesis.proof_score = 0.4;
    EvalOptions opt;
    opt.fit_classifier = true;
    auto a = evaluate(gold, preds, opt);
    auto b = evaluate(gold, preds, opt);
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
    EXPECT_EQ(a.breakdown_csv(), b.breakdown_csv());
    EXPECT_EQ(a.table(), b.table());
}

TEST(Predictions, JsonRoundTrip)
{
    Prediction p;
    p.id = "x1";
    p.hypothesis.proof = parse_proof("sent1 & sent2 -> int1: a b.; int1 -> hypothesis;", 2);
    p.hypothesis.proof_score = 0.75;
    p.hypothesis.iterations = 3;
    p.negation = Attempt{};
    p.negation->error = "boom";
    auto back = prediction_from_json(nlohmann::json::parse(prediction_to_json(p).dump()), 2);
    EXPECT_EQ(back.id, "x1");
    EXPECT_EQ(back.hypothesis.proof, p.hypothesis.proof);
    EXPECT_EQ(back.hypothesis.proof_score, 0.75);
    EXPECT_EQ(back.hypothesis.iterations, 3u);
    ASSERT_TRUE(back.negation.has_value());
    EXPECT_EQ(back.negation->error, "boom");
    EXPECT_FALSE(back.negation->proof.has_value());
    EXPECT_THROW(prediction_from_json(nlohmann::json::parse(R"({"id":"a","proof":"sent9 -> hypothesis;"})"), 2),
                 DataError);
}
