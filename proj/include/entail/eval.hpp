#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entail/proof_dsl.hpp"
#include "entail/synth.hpp"

namespace entail {

/// True when two intermediate conclusions count as the same sentence.
using SentenceSimilarity = std::function<bool(std::string const&, std::string const&)>;

/// Token-level F1 strictly above `threshold`.
SentenceSimilarity token_f1_similarity(double threshold = 0.55);

/// Predicted internal node -> gold internal node. Injective; leaves are
/// matched by their sent labels and are not listed.
struct Alignment {
    std::map<NodeId, NodeId> pred_to_gold;

    std::optional<NodeId> gold_of(NodeId pred) const;
};

/// The hypothesis aligns with the hypothesis. Other internal nodes are paired
/// greedily by Jaccard similarity of their leaf sets, highest first; ties go
/// to the higher token F1 of the conclusions, then the smaller gold index.
Alignment align_trees(LinearProof const& predicted, LinearProof const& gold);

struct ExampleScores {
    double leaves_f1 = 0.0;
    bool leaves_allcorrect = false;
    double steps_f1 = 0.0;
    bool steps_allcorrect = false;
    double interm_f1 = 0.0;
    bool interm_allcorrect = false;
    bool overall_allcorrect = false;
};

/// F1 from counts; two empty sets score 1.
double f1_score(std::size_t correct, std::size_t n_predicted, std::size_t n_gold);

ExampleScores score_example(LinearProof const& predicted,
                            LinearProof const& gold,
                            SentenceSimilarity const& similarity = token_f1_similarity());

/// Linear three-class decision over [score(h), score(not h)].
struct AnswerClassifier {
    /// Rows proved, disproved, unknown; columns w_h, w_neg, bias.
    std::array<std::array<double, 3>, 3> weights{};

    static AnswerClassifier reference();
    /// One-vs-rest least squares on the two scores.
    static AnswerClassifier fit(std::vector<std::array<double, 2>> const& scores, std::vector<Answer> const& labels);

    /// Ties at the top go to Unknown.
    Answer classify(double score_h, double score_neg) const;

    nlohmann::ordered_json to_json() const;
    static AnswerClassifier from_json(nlohmann::json const& j);
};

Answer classify_answer(AnswerClassifier const& clf, double score_h, double score_neg);

/// One search outcome for one sentence.
struct Attempt {
    std::optional<LinearProof> proof;
    double proof_score = 0.0;
    std::size_t iterations = 0;
    std::optional<std::string> error;
    bool bridge_failure = false;
};

struct Prediction {
    std::string id;
    Attempt hypothesis;
    /// Search for the negated hypothesis, when it was run.
    std::optional<Attempt> negation;
};

nlohmann::ordered_json prediction_to_json(Prediction const& p);
Prediction prediction_from_json(nlohmann::json const& j, std::size_t context_size);

struct DepthRecord {
    int depth = -1;
    Answer gold = Answer::Unknown;
    bool answer_correct = false;
    bool proof_correct = false;
};

struct DepthBucket {
    std::string name;  // "N/A", "0".."3", "All"
    std::size_t n = 0;
    double answer_accuracy = 0.0;  // percent
    double proof_accuracy = 0.0;   // percent
};

/// Unknown instances go to "N/A", the rest to their depth. Empty buckets
/// are left out.
std::vector<DepthBucket> breakdown_by_depth(std::vector<DepthRecord> const& records);

struct EvalOptions {
    double similarity_threshold = 0.55;
    AnswerClassifier classifier = AnswerClassifier::reference();
    /// Refit the classifier on the evaluated scores and gold answers.
    bool fit_classifier = false;
};

struct ExampleReport {
    std::string id;
    bool has_prediction = false;
    std::optional<ExampleScores> scores;  // when the instance has a gold proof
    Answer gold_answer = Answer::Unknown;
    std::optional<Answer> predicted_answer;
    bool proof_correct = false;
};

struct AggregateScores {
    std::size_t n = 0;
    double leaves_f1 = 0.0;
    double leaves_allcorrect = 0.0;
    double steps_f1 = 0.0;
    double steps_allcorrect = 0.0;
    double interm_f1 = 0.0;
    double interm_allcorrect = 0.0;
    double overall_allcorrect = 0.0;
};

struct EvalReport {
    std::vector<ExampleReport> examples;
    AggregateScores aggregate;
    std::vector<DepthBucket> depth_breakdown;  // empty when answers are unlabelled
    AnswerClassifier classifier;
    std::vector<std::string> missing;
    std::vector<std::string> warnings;

    nlohmann::ordered_json to_json() const;
    std::string breakdown_csv() const;
    std::string table() const;
};

EvalReport evaluate(std::vector<TaskInstance> const& gold,
                    std::vector<Prediction> const& predictions,
                    EvalOptions const& options = {});

}  // namespace entail
