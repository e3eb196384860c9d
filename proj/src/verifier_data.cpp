#include "entail/verifier_data.hpp"

#include <algorithm>
#include <memory>
#include <set>

#include "entail/errors.hpp"
#include "entail/logic.hpp"
#include "entail/step_sources.hpp"

namespace entail {

std::string to_string(Perturbation p)
{
    switch (p) {
    case Perturbation::None: return "none";
    case Perturbation::PremiseRemoved: return "premise_removed";
    case Perturbation::PremiseSwapped: return "premise_swapped";
    case Perturbation::PremiseCopied: return "premise_copied";
    case Perturbation::ConclusionNegated: return "conclusion_negated";
    }
    return "none";
}

std::vector<LabeledStep> extract_positives(LinearProof const& proof,
                                           std::vector<std::string> const& context,
                                           std::string const& hypothesis,
                                           std::string const& source_id)
{
    std::vector<LabeledStep> out;
    for (std::size_t i = 0; i < proof.steps.size(); ++i) {
        auto const& step = proof.steps[i];
        LabeledStep pos;
        pos.premises = premise_sentences(step, context, proof);
        if (step.conclusion.is_hypothesis()) {
            pos.conclusion = hypothesis;
        } else {
            pos.conclusion = step.conclusion_text.value_or("");
        }
        pos.source_id = source_id;
        out.push_back(std::move(pos));
    }
    return out;
}

namespace {

template <typename T>
T const& pick(std::vector<T> const& v, std::mt19937_64& rng)
{
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

LabeledStep negative_of(LabeledStep const& positive, Perturbation p)
{
    LabeledStep neg = positive;
    neg.label = Label::Negative;
    neg.perturbation = p;
    return neg;
}

}  // namespace

std::vector<LabeledStep> make_negatives(LabeledStep const& positive,
                                        Bm25Index const& index,
                                        std::mt19937_64& rng,
                                        FlavorWeights const& weights)
{
    if (positive.label != Label::Positive || positive.premises.empty()) {
        throw ConfigError("negatives need a positive step with premises");
    }
    auto const& premises = positive.premises;
    std::vector<LabeledStep> out;

    if (weights.removed > 0 && premises.size() < 2) {
        throw NotEnoughPremises("premise removal needs at least two premises");
    }
    for (std::size_t r = 0; r < weights.removed; ++r) {
        // Keep between 1 and n-1 premises, size uniform, subset uniform given size.
        auto keep = std::uniform_int_distribution<std::size_t>(1, premises.size() - 1)(rng);
        std::vector<std::size_t> idx(premises.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            idx[i] = i;
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(keep);
        std::sort(idx.begin(), idx.end());
        auto neg = negative_of(positive, Perturbation::PremiseRemoved);
        neg.premises.clear();
        for (auto i : idx) {
            neg.premises.push_back(premises[i]);
        }
        out.push_back(std::move(neg));
    }

    if (weights.swapped > 0) {
        if (index.empty()) {
            throw EmptyCorpus("no documents to draw a distractor from");
        }
        std::set<std::string> exclude(premises.begin(), premises.end());
        exclude.insert(positive.conclusion);
        auto top = bm25_topk(index, positive.conclusion, weights.swapped, exclude);
        for (auto const& [distractor, score] : top) {
            auto neg = negative_of(positive, Perturbation::PremiseSwapped);
            auto slot = std::uniform_int_distribution<std::size_t>(0, premises.size() - 1)(rng);
            neg.premises[slot] = distractor;
            out.push_back(std::move(neg));
        }
    }

    for (std::size_t r = 0; r < weights.copied; ++r) {
        auto neg = negative_of(positive, Perturbation::PremiseCopied);
        neg.conclusion = pick(premises, rng);
        if (neg.conclusion != positive.conclusion) {
            out.push_back(std::move(neg));
        }
    }

    for (std::size_t r = 0; r < weights.negated; ++r) {
        auto neg = negative_of(positive, Perturbation::ConclusionNegated);
        neg.conclusion = logic::negate(positive.conclusion);
        out.push_back(std::move(neg));
    }
    return out;
}

std::vector<LabeledStep> make_verifier_data(std::vector<TaskInstance> const& instances,
                                            VerifierDataConfig const& config)
{
    std::unique_ptr<Bm25Index> corpus;
    if (config.corpus_pool) {
        std::set<std::string> seen;
        std::vector<std::string> docs;
        for (auto const& inst : instances) {
            for (auto const& s : inst.context) {
                if (seen.insert(s).second) {
                    docs.push_back(s);
                }
            }
        }
        corpus = std::make_unique<Bm25Index>(std::move(docs));
    }

    std::vector<std::vector<LabeledStep>> per_instance(instances.size());
    auto n = static_cast<std::int64_t>(instances.size());
    std::string failure;
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, config.jobs))
    for (std::int64_t i = 0; i < n; ++i) {
        auto const& inst = instances[static_cast<std::size_t>(i)];
        if (!inst.gold_proof) {
            continue;
        }
        try {
            std::mt19937_64 rng(instance_seed(config.seed, static_cast<std::uint64_t>(i)));
            std::unique_ptr<Bm25Index> local;
            Bm25Index const* index = corpus.get();
            if (index == nullptr) {
                local = std::make_unique<Bm25Index>(inst.context);
                index = local.get();
            }
            auto& out = per_instance[static_cast<std::size_t>(i)];
            for (auto const& pos : extract_positives(*inst.gold_proof, inst.context, inst.proved_sentence(), inst.id)) {
                out.push_back(pos);
                auto weights = config.weights;
                if (pos.premises.size() < 2) {
                    weights.removed = 0;
                }
                auto negs = make_negatives(pos, *index, rng, weights);
                out.insert(out.end(), negs.begin(), negs.end());
            }
        } catch (Error const& e) {
#pragma omp critical(entail_verifier_data_failure)
            if (failure.empty()) {
                failure = inst.id + ": " + e.what();
            }
        }
    }
    if (!failure.empty()) {
        throw DataError(failure);
    }
    std::vector<LabeledStep> out;
    for (auto& v : per_instance) {
        out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    }
    return out;
}

nlohmann::ordered_json labeled_step_to_json(LabeledStep const& step)
{
    nlohmann::ordered_json j;
    j["premises"] = step.premises;
    j["conclusion"] = step.conclusion;
    j["label"] = step.label == Label::Positive ? "pos" : "neg";
    j["perturbation"] = to_string(step.perturbation);
    j["source_id"] = step.source_id;
    return j;
}

}  // namespace entail
