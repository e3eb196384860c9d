#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "entail/proof_dsl.hpp"

namespace entail::fixtures {

/// A well-formed proof of 1..max_steps steps over `context_size` sentences.
/// Intermediate texts come from a pool of `text_pool` sentences.
inline LinearProof random_proof(std::mt19937_64& rng,
                                std::size_t context_size,
                                int max_steps = 6,
                                unsigned text_pool = 1000)
{
    int n = std::uniform_int_distribution<int>(1, max_steps)(rng);
    LinearProof p;
    std::vector<NodeId> avail;
    for (std::uint32_t k = 1; k <= context_size; ++k) {
        avail.push_back(NodeId::sent(k));
    }
    for (int s = 0; s < n; ++s) {
        StepText st;
        std::shuffle(avail.begin(), avail.end(), rng);
        auto np = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(3, avail.size()))(rng);
        st.premises.assign(avail.begin(), avail.begin() + static_cast<std::ptrdiff_t>(np));
        std::sort(st.premises.begin(), st.premises.end());
        if (s + 1 == n) {
            st.conclusion = NodeId::hypothesis();
        } else {
            st.conclusion = NodeId::intermediate(static_cast<std::uint32_t>(s + 1));
            st.conclusion_text = "conclusion " + std::to_string(rng() % text_pool);
            avail.push_back(st.conclusion);
        }
        p.steps.push_back(std::move(st));
    }
    return p;
}

struct MetricGolden {
    char const* name;
    char const* predicted;
    char const* gold;
    double leaves_f1;
    double steps_f1;
    double interm_f1;
    bool overall;
};

inline constexpr std::size_t kGoldenContext = 6;

// Expected values are worked out by hand from the alignment and F1 rules.
inline std::vector<MetricGolden> const& metric_goldens()
{
    static std::vector<MetricGolden> const goldens{
        {"identical_two_steps",
         "sent1 & sent2 -> int1: bob is red.; int1 & sent3 -> hypothesis;",
         "sent1 & sent2 -> int1: bob is red.; int1 & sent3 -> hypothesis;",
         1.0, 1.0, 1.0, true},
        // leaves {1,2} vs {1,3}: precision = recall = 1/2
        {"one_wrong_leaf",
         "sent1 & sent2 -> hypothesis;",
         "sent1 & sent3 -> hypothesis;",
         0.5, 0.0, 1.0, false},
        {"identical_single_step",
         "sent1 & sent2 -> hypothesis;",
         "sent1 & sent2 -> hypothesis;",
         1.0, 1.0, 1.0, true},
        // precision 2/3, recall 1
        {"extra_leaf",
         "sent1 & sent2 & sent3 -> hypothesis;",
         "sent1 & sent2 -> hypothesis;",
         0.8, 0.0, 1.0, false},
        {"wrong_intermediate_text",
         "sent1 & sent2 -> int1: cats chase mice.; int1 & sent3 -> hypothesis;",
         "sent1 & sent2 -> int1: bob is red.; int1 & sent3 -> hypothesis;",
         1.0, 1.0, 0.0, false},
        // token F1 3/4 clears the 0.55 threshold
        {"paraphrased_intermediate",
         "sent1 & sent2 -> int1: bob is red and big.; int1 & sent3 -> hypothesis;",
         "sent1 & sent2 -> int1: bob is red.; int1 & sent3 -> hypothesis;",
         1.0, 1.0, 1.0, true},
        // steps 0 of (1 pred, 2 gold); intermediates 0 of (0 pred, 1 gold)
        {"flattened_tree",
         "sent1 & sent2 & sent3 -> hypothesis;",
         "sent1 & sent2 -> int1: bob is red.; int1 & sent3 -> hypothesis;",
         1.0, 0.0, 0.0, false},
        // leaves 3/4 precision; steps 1 of (3, 2); intermediates 1 of (2, 1)
        {"extra_branch",
         "sent1 & sent2 -> int1: bob is red.; sent3 & sent4 -> int2: bob is kind.; int1 & int2 -> hypothesis;",
         "sent1 & sent2 -> int1: bob is red.; int1 & sent3 -> hypothesis;",
         6.0 / 7.0, 0.4, 2.0 / 3.0, false},
        {"disjoint_leaves",
         "sent4 & sent5 -> hypothesis;",
         "sent1 & sent2 -> hypothesis;",
         0.0, 0.0, 1.0, false},
        {"renumbered_intermediates",
         "sent3 & sent4 -> int1: anne is cold.; sent1 & sent2 -> int2: bob is red.; int1 & int2 -> hypothesis;",
         "sent1 & sent2 -> int1: bob is red.; sent3 & sent4 -> int2: anne is cold.; int1 & int2 -> hypothesis;",
         1.0, 1.0, 1.0, true},
        // Jaccards int1/int1 1, int1/int2 2/3, int2/int1 2/3, int2/int2 1/2
        {"crossed_leaves",
         "sent1 & sent2 -> int1: bob is red.; int1 & sent4 -> int2: bob is kind.; int2 & sent3 -> hypothesis;",
         "sent1 & sent2 -> int1: bob is red.; int1 & sent3 -> int2: bob is kind.; int2 & sent4 -> hypothesis;",
         1.0, 1.0 / 3.0, 1.0, false},
        // leaves recall 2/3; steps 1 of (1, 2)
        {"partial_proof",
         "sent1 & sent2 -> int1: bob is red.;",
         "sent1 & sent2 -> int1: bob is red.; int1 & sent3 -> hypothesis;",
         0.8, 2.0 / 3.0, 1.0, false},
    };
    return goldens;
}

}  // namespace entail::fixtures
