#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "entail/proof_dsl.hpp"

namespace entail {

struct WorldConfig {
    std::size_t n_entities = 6;
    std::size_t n_attributes = 8;
    std::size_t n_rules = 5;  // per entity
    std::uint64_t seed = 0;
};

/// One entity's theory: a base fact and single-antecedent rules whose
/// attribute graph is acyclic.
struct EntityTheory {
    std::string name;
    std::string base_attribute;
    std::vector<std::pair<std::string, std::string>> rules;  // antecedent -> consequent
};

struct World {
    std::vector<EntityTheory> entities;
    std::vector<std::string> attributes;
    std::uint64_t seed = 0;

    std::vector<std::string> facts() const;
    std::vector<std::string> rules() const;
};

/// Throws ConfigError for zero counts or more rules than attribute pairs.
World generate_world(WorldConfig const& config);

enum class Answer : std::uint8_t { Proved, Disproved, Unknown };

std::string to_string(Answer a);
Answer answer_from_string(std::string const& s);

struct TaskInstance {
    std::string id;
    std::string hypothesis;
    std::vector<std::string> context;
    /// For Disproved instances the proof concludes the negated hypothesis.
    std::optional<LinearProof> gold_proof;
    Answer answer = Answer::Unknown;
    int depth = -1;  // -1 when there is no gold proof
    /// False for records that carry no answer label (EntailmentBank).
    bool answer_labelled = true;

    /// The sentence the gold proof concludes.
    std::string proved_sentence() const;
};

struct InstanceSpec {
    int depth = 0;  // 0..3
    Answer answer = Answer::Proved;
    std::size_t n_distractors = 0;
    /// When set, distractors pad the context to exactly this many sentences.
    std::optional<std::size_t> context_size;
};

/// Throws DepthUnreachable when no entity has an attribute at exactly the
/// requested depth (or nothing is unreachable, for Unknown), ConfigError when
/// the world has too few unrelated sentences for the distractors.
TaskInstance make_instance(World const& world, InstanceSpec const& spec, std::mt19937_64& rng);

struct DatasetConfig {
    WorldConfig world;
    std::size_t n = 100;
    std::vector<int> depths{0, 1, 2, 3};
    std::size_t n_distractors = 20;
    std::optional<std::size_t> context_size;
    /// Relative weights of proved : disproved : unknown.
    std::array<std::size_t, 3> answer_weights{1, 1, 1};
    std::uint64_t seed = 0;
};

/// Per-instance seed derived from the dataset seed and the instance number.
std::uint64_t instance_seed(std::uint64_t dataset_seed, std::uint64_t index);

/// Answer counts are met exactly (largest remainder); depths cycle through
/// `depths`. Instance i depends only on (seed, i).
std::vector<TaskInstance> make_dataset(DatasetConfig const& config);
TaskInstance make_dataset_instance(DatasetConfig const& config, std::size_t index, Answer answer);

nlohmann::ordered_json instance_to_json(TaskInstance const& inst);
/// Accepts the generator's own output and EntailmentBank/RuleTaker-shaped
/// records (context as an object of sent<k> keys or as a flat string).
TaskInstance instance_from_json(nlohmann::json const& j);

}  // namespace entail
