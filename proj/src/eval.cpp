#include "entail/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

#include "entail/errors.hpp"
#include "entail/text.hpp"

namespace entail {

SentenceSimilarity token_f1_similarity(double threshold)
{
    return [threshold](std::string const& a, std::string const& b) { return token_f1(a, b) > threshold; };
}

std::optional<NodeId> Alignment::gold_of(NodeId pred) const
{
    auto it = pred_to_gold.find(pred);
    if (it == pred_to_gold.end()) {
        return std::nullopt;
    }
    return it->second;
}

namespace {

struct TreeView {
    std::map<NodeId, StepText const*> step_of;
    std::map<NodeId, std::set<NodeId>> leaves;

    explicit TreeView(LinearProof const& proof)
    {
        for (auto const& s : proof.steps) {
            step_of[s.conclusion] = &s;
        }
        for (auto const& s : proof.steps) {
            leaves_of(s.conclusion);
        }
    }

    std::set<NodeId> const& leaves_of(NodeId node)
    {
        auto it = leaves.find(node);
        if (it != leaves.end()) {
            return it->second;
        }
        std::set<NodeId> out;
        leaves[node] = {};  // guards against malformed cyclic input
        for (auto p : step_of.at(node)->premises) {
            if (p.is_sent()) {
                out.insert(p);
            } else if (step_of.count(p) != 0) {
                auto const& sub = leaves_of(p);
                out.insert(sub.begin(), sub.end());
            }
        }
        return leaves[node] = std::move(out);
    }

    std::string text_of(NodeId node) const
    {
        auto it = step_of.find(node);
        if (it == step_of.end() || !it->second->conclusion_text) {
            return {};
        }
        return *it->second->conclusion_text;
    }

    std::set<NodeId> all_leaves() const
    {
        std::set<NodeId> out;
        for (auto const& [node, step] : step_of) {
            for (auto p : step->premises) {
                if (p.is_sent()) {
                    out.insert(p);
                }
            }
        }
        return out;
    }
};

double jaccard(std::set<NodeId> const& a, std::set<NodeId> const& b)
{
    if (a.empty() && b.empty()) {
        return 0.0;
    }
    std::size_t inter = 0;
    for (auto const& x : a) {
        inter += b.count(x);
    }
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace

Alignment align_trees(LinearProof const& predicted, LinearProof const& gold)
{
    TreeView p(predicted);
    TreeView g(gold);
    Alignment out;
    if (p.step_of.count(NodeId::hypothesis()) != 0 && g.step_of.count(NodeId::hypothesis()) != 0) {
        out.pred_to_gold[NodeId::hypothesis()] = NodeId::hypothesis();
    }
    struct Pair {
        double jaccard;
        double f1;
        NodeId pred;
        NodeId gold;
    };
    std::vector<Pair> pairs;
    for (auto const& [pn, ps] : p.step_of) {
        if (pn.is_hypothesis()) {
            continue;
        }
        for (auto const& [gn, gs] : g.step_of) {
            if (gn.is_hypothesis()) {
                continue;
            }
            double j = jaccard(p.leaves.at(pn), g.leaves.at(gn));
            if (j > 0.0) {
                pairs.push_back({j, token_f1(p.text_of(pn), g.text_of(gn)), pn, gn});
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](Pair const& a, Pair const& b) {
        return std::tie(b.jaccard, b.f1, a.gold, a.pred) < std::tie(a.jaccard, a.f1, b.gold, b.pred);
    });
    std::set<NodeId> used_gold;
    for (auto const& pr : pairs) {
        if (out.pred_to_gold.count(pr.pred) != 0 || used_gold.count(pr.gold) != 0) {
            continue;
        }
        out.pred_to_gold[pr.pred] = pr.gold;
        used_gold.insert(pr.gold);
    }
    return out;
}

double f1_score(std::size_t correct, std::size_t n_predicted, std::size_t n_gold)
{
    if (n_predicted == 0 && n_gold == 0) {
        return 1.0;
    }
    if (correct == 0) {
        return 0.0;
    }
    double precision = static_cast<double>(correct) / static_cast<double>(n_predicted);
    double recall = static_cast<double>(correct) / static_cast<double>(n_gold);
    return 2.0 * precision * recall / (precision + recall);
}

ExampleScores score_example(LinearProof const& predicted, LinearProof const& gold, SentenceSimilarity const& similarity)
{
    TreeView p(predicted);
    TreeView g(gold);
    auto alignment = align_trees(predicted, gold);
    ExampleScores s;

    auto pl = p.all_leaves();
    auto gl = g.all_leaves();
    std::size_t leaf_hits = 0;
    for (auto const& x : pl) {
        leaf_hits += gl.count(x);
    }
    s.leaves_f1 = f1_score(leaf_hits, pl.size(), gl.size());

    std::size_t step_hits = 0;
    std::size_t interm_hits = 0;
    std::size_t pred_ints = 0;
    std::size_t gold_ints = 0;
    for (auto const& [gn, gs] : g.step_of) {
        gold_ints += gn.is_int() ? 1 : 0;
    }
    for (auto const& [pn, ps] : p.step_of) {
        pred_ints += pn.is_int() ? 1 : 0;
        auto gn = alignment.gold_of(pn);
        if (!gn) {
            continue;
        }
        std::set<NodeId> mapped;
        bool complete = true;
        for (auto c : ps->premises) {
            if (c.is_sent()) {
                mapped.insert(c);
            } else if (auto m = alignment.gold_of(c)) {
                mapped.insert(*m);
            } else {
                complete = false;
            }
        }
        auto const& gold_children = g.step_of.at(*gn)->premises;
        if (complete && mapped == std::set<NodeId>(gold_children.begin(), gold_children.end())) {
            ++step_hits;
        }
        if (pn.is_int() && gn->is_int() && similarity(p.text_of(pn), g.text_of(*gn))) {
            ++interm_hits;
        }
    }
    s.steps_f1 = f1_score(step_hits, p.step_of.size(), g.step_of.size());
    s.interm_f1 = f1_score(interm_hits, pred_ints, gold_ints);
    s.leaves_allcorrect = s.leaves_f1 == 1.0;
    s.steps_allcorrect = s.steps_f1 == 1.0;
    s.interm_allcorrect = s.interm_f1 == 1.0;
    s.overall_allcorrect = s.leaves_allcorrect && s.steps_allcorrect && s.interm_allcorrect;
    return s;
}

// ---------------------------------------------------------------------------

AnswerClassifier AnswerClassifier::reference()
{
    AnswerClassifier c;
    c.weights[0] = {1.0, -1.0, 0.0};
    c.weights[1] = {-1.0, 1.0, 0.0};
    c.weights[2] = {-0.5, -0.5, 0.5};
    return c;
}

namespace {

std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b)
{
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
                pivot = r;
            }
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        if (a[col][col] == 0.0) {
            throw DomainError("singular system in classifier fit");
        }
        for (int r = 0; r < 3; ++r) {
            if (r == col) {
                continue;
            }
            double f = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c) {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    return {b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]};
}

}  // namespace

AnswerClassifier AnswerClassifier::fit(std::vector<std::array<double, 2>> const& scores, std::vector<Answer> const& labels)
{
    if (scores.size() != labels.size() || scores.empty()) {
        throw ConfigError("classifier fit needs one label per score pair and at least one example");
    }
    constexpr double kRidge = 1e-9;
    std::array<std::array<double, 3>, 3> gram{};
    std::array<std::array<double, 3>, 3> rhs{};  // per class
    for (std::size_t i = 0; i < scores.size(); ++i) {
        std::array<double, 3> x{scores[i][0], scores[i][1], 1.0};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                gram[r][c] += x[r] * x[c];
            }
        }
        auto k = static_cast<std::size_t>(labels[i]);
        for (int r = 0; r < 3; ++r) {
            rhs[k][r] += x[r];
        }
    }
    for (int r = 0; r < 3; ++r) {
        gram[r][r] += kRidge;
    }
    AnswerClassifier c;
    for (std::size_t k = 0; k < 3; ++k) {
        c.weights[k] = solve3(gram, rhs[k]);
    }
    return c;
}

Answer AnswerClassifier::classify(double score_h, double score_neg) const
{
    std::array<double, 3> s{};
    for (std::size_t k = 0; k < 3; ++k) {
        s[k] = weights[k][0] * score_h + weights[k][1] * score_neg + weights[k][2];
    }
    if (s[2] >= s[0] && s[2] >= s[1]) {
        return Answer::Unknown;
    }
    if (s[0] == s[1]) {
        return Answer::Unknown;
    }
    return s[0] > s[1] ? Answer::Proved : Answer::Disproved;
}

nlohmann::ordered_json AnswerClassifier::to_json() const
{
    nlohmann::ordered_json j;
    char const* names[] = {"proved", "disproved", "unknown"};
    for (std::size_t k = 0; k < 3; ++k) {
        j[names[k]] = weights[k];
    }
    return j;
}

AnswerClassifier AnswerClassifier::from_json(nlohmann::json const& j)
{
    AnswerClassifier c;
    char const* names[] = {"proved", "disproved", "unknown"};
    try {
        for (std::size_t k = 0; k < 3; ++k) {
            c.weights[k] = j.at(names[k]).get<std::array<double, 3>>();
        }
    } catch (nlohmann::json::exception const& e) {
        throw ConfigError(std::string("classifier weights: ") + e.what());
    }
    return c;
}

Answer classify_answer(AnswerClassifier const& clf, double score_h, double score_neg)
{
    return clf.classify(score_h, score_neg);
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json attempt_to_json(Attempt const& a)
{
    nlohmann::ordered_json j;
    if (a.proof) {
        j["proof"] = serialize_proof(*a.proof);
    } else {
        j["proof"] = nullptr;
    }
    j["proof_score"] = a.proof_score;
    j["iterations"] = a.iterations;
    if (a.error) {
        j["error"] = *a.error;
    }
    return j;
}

Attempt attempt_from_json(nlohmann::json const& j, std::size_t context_size)
{
    Attempt a;
    if (j.contains("proof") && j.at("proof").is_string()) {
        a.proof = parse_proof(j.at("proof").get<std::string>(), context_size);
    }
    a.proof_score = j.value("proof_score", 0.0);
    a.iterations = j.value("iterations", std::size_t{0});
    if (j.contains("error") && j.at("error").is_string()) {
        a.error = j.at("error").get<std::string>();
    }
    return a;
}

}  // namespace

nlohmann::ordered_json prediction_to_json(Prediction const& p)
{
    nlohmann::ordered_json j;
    j["id"] = p.id;
    auto fields = attempt_to_json(p.hypothesis);
    for (auto& [k, v] : fields.items()) {
        j[k] = v;
    }
    if (p.negation) {
        j["negation"] = attempt_to_json(*p.negation);
    }
    return j;
}

Prediction prediction_from_json(nlohmann::json const& j, std::size_t context_size)
{
    Prediction p;
    try {
        p.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
        p.hypothesis = attempt_from_json(j, context_size);
        if (j.contains("negation") && j.at("negation").is_object()) {
            p.negation = attempt_from_json(j.at("negation"), context_size);
        }
    } catch (nlohmann::json::exception const& e) {
        throw DataError("prediction record: " + std::string(e.what()));
    } catch (ProofFormatError const& e) {
        throw DataError("prediction '" + p.id + "': " + e.what());
    }
    return p;
}

// ---------------------------------------------------------------------------

std::vector<DepthBucket> breakdown_by_depth(std::vector<DepthRecord> const& records)
{
    std::map<int, std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> acc;  // key -1 = N/A
    for (auto const& r : records) {
        int key = r.gold == Answer::Unknown ? -1 : r.depth;
        auto& [n, hits] = acc[key];
        ++n;
        hits.first += r.answer_correct ? 1 : 0;
        hits.second += r.proof_correct ? 1 : 0;
    }
    std::vector<DepthBucket> out;
    std::size_t total = 0;
    std::size_t answer_total = 0;
    std::size_t proof_total = 0;
    for (auto const& [key, v] : acc) {
        auto const& [n, hits] = v;
        DepthBucket b;
        b.name = key < 0 ? "N/A" : std::to_string(key);
        b.n = n;
        b.answer_accuracy = 100.0 * static_cast<double>(hits.first) / static_cast<double>(n);
        b.proof_accuracy = 100.0 * static_cast<double>(hits.second) / static_cast<double>(n);
        out.push_back(b);
        total += n;
        answer_total += hits.first;
        proof_total += hits.second;
    }
    if (total > 0) {
        out.push_back({"All", total, 100.0 * static_cast<double>(answer_total) / static_cast<double>(total),
                       100.0 * static_cast<double>(proof_total) / static_cast<double>(total)});
    }
    return out;
}

EvalReport evaluate(std::vector<TaskInstance> const& gold,
                    std::vector<Prediction> const& predictions,
                    EvalOptions const& options)
{
    EvalReport report;
    std::map<std::string, Prediction const*> by_id;
    for (auto const& p : predictions) {
        by_id[p.id] = &p;
    }
    if (predictions.empty()) {
        report.warnings.push_back("no predictions; every metric is 0");
    }

    std::vector<std::array<double, 2>> score_pairs(gold.size(), {0.0, 0.0});
    for (std::size_t i = 0; i < gold.size(); ++i) {
        auto it = by_id.find(gold[i].id);
        if (it != by_id.end()) {
            auto const& p = *it->second;
            score_pairs[i] = {p.hypothesis.proof_score, p.negation ? p.negation->proof_score : 0.0};
        }
    }
    report.classifier = options.classifier;
    bool labelled = std::any_of(gold.begin(), gold.end(), [](auto const& g) { return g.answer_labelled; });
    if (options.fit_classifier && labelled) {
        std::vector<std::array<double, 2>> xs;
        std::vector<Answer> ys;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            if (gold[i].answer_labelled && by_id.count(gold[i].id) != 0) {
                xs.push_back(score_pairs[i]);
                ys.push_back(gold[i].answer);
            }
        }
        if (!xs.empty()) {
            report.classifier = AnswerClassifier::fit(xs, ys);
        }
    }

    auto similarity = token_f1_similarity(options.similarity_threshold);
    std::vector<DepthRecord> depth_records;
    AggregateScores& agg = report.aggregate;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        auto const& inst = gold[i];
        ExampleReport ex;
        ex.id = inst.id;
        ex.gold_answer = inst.answer;
        auto it = by_id.find(inst.id);
        Prediction const* pred = it == by_id.end() ? nullptr : it->second;
        ex.has_prediction = pred != nullptr;
        if (pred == nullptr) {
            report.missing.push_back(inst.id);
        }

        // The attempt that should reproduce the gold proof.
        Attempt const* attempt = nullptr;
        if (pred != nullptr) {
            attempt = inst.answer == Answer::Disproved && pred->negation ? &*pred->negation : &pred->hypothesis;
        }
        if (inst.gold_proof) {
            ExampleScores s;
            if (attempt != nullptr && attempt->proof) {
                s = score_example(*attempt->proof, *inst.gold_proof, similarity);
            }
            ex.scores = s;
            ++agg.n;
            agg.leaves_f1 += s.leaves_f1;
            agg.leaves_allcorrect += s.leaves_allcorrect ? 1.0 : 0.0;
            agg.steps_f1 += s.steps_f1;
            agg.steps_allcorrect += s.steps_allcorrect ? 1.0 : 0.0;
            agg.interm_f1 += s.interm_f1;
            agg.interm_allcorrect += s.interm_allcorrect ? 1.0 : 0.0;
            agg.overall_allcorrect += s.overall_allcorrect ? 1.0 : 0.0;
        }
        if (pred != nullptr) {
            ex.predicted_answer = report.classifier.classify(score_pairs[i][0], score_pairs[i][1]);
        }
        bool answer_correct = ex.predicted_answer && *ex.predicted_answer == inst.answer;
        if (inst.answer == Answer::Unknown) {
            ex.proof_correct = answer_correct;
        } else {
            ex.proof_correct = answer_correct && ex.scores && ex.scores->leaves_allcorrect && ex.scores->steps_allcorrect;
        }
        if (inst.answer_labelled) {
            depth_records.push_back({inst.depth, inst.answer, answer_correct, ex.proof_correct});
        }
        report.examples.push_back(std::move(ex));
    }
    if (agg.n > 0) {
        for (double* v : {&agg.leaves_f1, &agg.leaves_allcorrect, &agg.steps_f1, &agg.steps_allcorrect, &agg.interm_f1,
                          &agg.interm_allcorrect, &agg.overall_allcorrect}) {
            *v = *v * 100.0 / static_cast<double>(agg.n);
        }
    }
    report.depth_breakdown = breakdown_by_depth(depth_records);
    return report;
}

nlohmann::ordered_json EvalReport::to_json() const
{
    nlohmann::ordered_json j;
    nlohmann::ordered_json a;
    a["n"] = aggregate.n;
    a["leaves_f1"] = aggregate.leaves_f1;
    a["leaves_allcorrect"] = aggregate.leaves_allcorrect;
    a["steps_f1"] = aggregate.steps_f1;
    a["steps_allcorrect"] = aggregate.steps_allcorrect;
    a["interm_f1"] = aggregate.interm_f1;
    a["interm_allcorrect"] = aggregate.interm_allcorrect;
    a["overall_allcorrect"] = aggregate.overall_allcorrect;
    j["aggregate"] = a;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (auto const& b : depth_breakdown) {
        rows.push_back({{"bucket", b.name}, {"n", b.n}, {"answer_accuracy", b.answer_accuracy},
                        {"proof_accuracy", b.proof_accuracy}});
    }
    j["depth_breakdown"] = rows;
    j["classifier"] = classifier.to_json();
    j["missing"] = missing;
    j["warnings"] = warnings;
    nlohmann::ordered_json exs = nlohmann::ordered_json::array();
    for (auto const& e : examples) {
        nlohmann::ordered_json x;
        x["id"] = e.id;
        x["has_prediction"] = e.has_prediction;
        if (e.scores) {
            x["leaves_f1"] = e.scores->leaves_f1;
            x["leaves_allcorrect"] = e.scores->leaves_allcorrect;
            x["steps_f1"] = e.scores->steps_f1;
            x["steps_allcorrect"] = e.scores->steps_allcorrect;
            x["interm_f1"] = e.scores->interm_f1;
            x["interm_allcorrect"] = e.scores->interm_allcorrect;
            x["overall_allcorrect"] = e.scores->overall_allcorrect;
        }
        x["gold_answer"] = to_string(e.gold_answer);
        if (e.predicted_answer) {
            x["predicted_answer"] = to_string(*e.predicted_answer);
        } else {
            x["predicted_answer"] = nullptr;
        }
        x["proof_correct"] = e.proof_correct;
        exs.push_back(std::move(x));
    }
    j["examples"] = exs;
    return j;
}

std::string EvalReport::breakdown_csv() const
{
    std::ostringstream out;
    out << "bucket,n,answer_accuracy,proof_accuracy\n" << std::fixed << std::setprecision(1);
    for (auto const& b : depth_breakdown) {
        out << b.name << ',' << b.n << ',' << b.answer_accuracy << ',' << b.proof_accuracy << '\n';
    }
    return out.str();
}

std::string EvalReport::table() const
{
    std::ostringstream out;
    out << std::fixed << std::setprecision(1);
    out << "             Leaves         Steps          Intermediates  Overall\n";
    out << "             F1     AllCorr F1     AllCorr F1     AllCorr AllCorr\n";
    out << "n=" << std::left << std::setw(10) << aggregate.n << std::right;
    for (double v : {aggregate.leaves_f1, aggregate.leaves_allcorrect, aggregate.steps_f1, aggregate.steps_allcorrect,
                     aggregate.interm_f1, aggregate.interm_allcorrect, aggregate.overall_allcorrect}) {
        out << ' ' << std::setw(7) << v;
    }
    out << '\n';
    if (!depth_breakdown.empty()) {
        out << "\n" << std::left << std::setw(10) << "depth";
        for (auto const& b : depth_breakdown) {
            out << std::right << std::setw(8) << b.name;
        }
        out << "\n" << std::left << std::setw(10) << "n";
        for (auto const& b : depth_breakdown) {
            out << std::right << std::setw(8) << b.n;
        }
        out << "\n" << std::left << std::setw(10) << "answer";
        for (auto const& b : depth_breakdown) {
            out << std::right << std::setw(8) << b.answer_accuracy;
        }
        out << "\n" << std::left << std::setw(10) << "proof";
        for (auto const& b : depth_breakdown) {
            out << std::right << std::setw(8) << b.proof_accuracy;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace entail
