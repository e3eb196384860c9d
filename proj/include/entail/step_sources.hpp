#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "entail/proof_dsl.hpp"

namespace entail {

/// One generated step with its prover score in [0, 1].
struct Candidate {
    StepText step;
    double score = 0.0;
};

/// Candidate step generation. Implementations may return ill-formed steps;
/// the search filters them.
class StepSource {
  public:
    virtual ~StepSource() = default;

    /// At most `n` candidates for extending `partial` towards `hypothesis`.
    /// `partial` uses `sent<k>` for context[k-1] and its own `int<k>` labels.
    virtual std::vector<Candidate> generate(std::string const& hypothesis,
                                            std::vector<std::string> const& context,
                                            LinearProof const& partial,
                                            std::size_t n) = 0;
};

/// Step validity scoring in [0, 1]. The score must not depend on premise order.
class StepScorer {
  public:
    virtual ~StepScorer() = default;

    virtual double score(std::vector<std::string> const& premises, std::string const& conclusion) = 0;

    /// Scores a step whose conclusion is the hypothesis under proof. Scorers
    /// that reject premise copies accept a hypothesis restating a given fact
    /// here; the default treats it like any other step.
    virtual double score_hypothesis_step(std::vector<std::string> const& premises,
                                         std::string const& hypothesis)
    {
        return score(premises, hypothesis);
    }
};

// ---------------------------------------------------------------------------
// Built-ins for the synthetic rule domain.

/// One round of forward chaining over the context and the partial proof.
/// Steps concluding the hypothesis rank first, then steps whose conclusion
/// can still reach the hypothesis through context rules, then the rest.
class ExactProver : public StepSource {
  public:
    std::vector<Candidate> generate(std::string const& hypothesis,
                                    std::vector<std::string> const& context,
                                    LinearProof const& partial,
                                    std::size_t n) override;
};

/// 1.0 iff the conclusion follows from the premises by exactly one rule
/// application; copies of a premise and unreachable conclusions score 0.
class ExactVerifier : public StepScorer {
  public:
    double score(std::vector<std::string> const& premises, std::string const& conclusion) override;
    double score_hypothesis_step(std::vector<std::string> const& premises,
                                 std::string const& hypothesis) override;
};

/// Exact prover with seeded noise: every candidate is dropped with
/// probability `drop`; with probability `inject` a hallucinated step from
/// random premises straight to the hypothesis is added, scored U[0.5, 1].
/// Noise is drawn afresh on every call from one seeded stream.
class NoisyProver : public StepSource {
  public:
    NoisyProver(double drop, double inject, std::uint64_t seed);

    std::vector<Candidate> generate(std::string const& hypothesis,
                                    std::vector<std::string> const& context,
                                    LinearProof const& partial,
                                    std::size_t n) override;

  private:
    ExactProver m_exact;
    double m_drop;
    double m_inject;
    std::mt19937_64 m_rng;
};

/// Adds every ground-truth step whose premises the partial proof satisfies
/// to the inner prover's candidates (score 1.0, listed first, never truncated).
class OracleProver : public StepSource {
  public:
    OracleProver(std::unique_ptr<StepSource> inner, ProofTree gold);

    std::vector<Candidate> generate(std::string const& hypothesis,
                                    std::vector<std::string> const& context,
                                    LinearProof const& partial,
                                    std::size_t n) override;

  private:
    std::unique_ptr<StepSource> m_inner;
    ProofTree m_gold;
};

/// Scores ground-truth steps 1.0 and defers everything else to `inner`.
class OracleVerifier : public StepScorer {
  public:
    OracleVerifier(std::unique_ptr<StepScorer> inner,
                   ProofTree const& gold,
                   std::string const& hypothesis,
                   std::vector<std::string> const& context);

    double score(std::vector<std::string> const& premises, std::string const& conclusion) override;
    double score_hypothesis_step(std::vector<std::string> const& premises,
                                 std::string const& hypothesis) override;

    bool is_gold(std::vector<std::string> const& premises, std::string const& conclusion) const;

  private:
    using Key = std::tuple<std::vector<std::string>, std::string>;
    static Key key_of(std::vector<std::string> const& premises, std::string const& conclusion);

    std::unique_ptr<StepScorer> m_inner;
    std::set<Key> m_gold;
};

/// Sentences of the premises of `step`, resolved against the context and a
/// partial proof's intermediates.
std::vector<std::string> premise_sentences(StepText const& step,
                                           std::vector<std::string> const& context,
                                           LinearProof const& partial);

}  // namespace entail
