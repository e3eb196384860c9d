#include "entail/synth.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>

#include "entail/errors.hpp"
#include "entail/logic.hpp"
#include "entail/text.hpp"

namespace entail {

namespace {

constexpr std::array<char const*, 16> kEntities{"anne",  "bob",   "charlie", "dave",  "erin",  "fiona",
                                                "gary",  "harry", "ivy",     "jack",  "kate",  "liam",
                                                "mona",  "nick",  "olga",    "paul"};
constexpr std::array<char const*, 20> kAttributes{"big",   "blue",  "cold",  "furry", "green", "kind",  "nice",
                                                  "quiet", "red",   "rough", "round", "smart", "white", "young",
                                                  "tall",  "calm",  "shy",   "loud",  "brave", "quick"};

template <std::size_t N>
std::string vocab(std::array<char const*, N> const& words, std::size_t i, char const* fallback)
{
    if (i < N) {
        return words[i];
    }
    return std::string(fallback) + std::to_string(i);
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string fact_sentence(std::string const& entity, std::string const& attribute, bool positive = true)
{
    return logic::render(logic::Literal{entity, attribute, positive});
}

std::string rule_sentence(std::string const& entity, std::string const& from, std::string const& to)
{
    return logic::render(logic::Rule{{logic::Literal{entity, from, true}}, logic::Literal{entity, to, true}});
}

// Shortest derivation chains from the base attribute: attribute -> (depth, rule index used).
std::map<std::string, std::pair<int, int>> derivations(EntityTheory const& theory)
{
    std::map<std::string, std::pair<int, int>> found{{theory.base_attribute, {0, -1}}};
    std::deque<std::string> queue{theory.base_attribute};
    while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        for (int r = 0; r < static_cast<int>(theory.rules.size()); ++r) {
            auto const& [from, to] = theory.rules[static_cast<std::size_t>(r)];
            if (from == cur && found.count(to) == 0) {
                found[to] = {found[cur].first + 1, r};
                queue.push_back(to);
            }
        }
    }
    return found;
}

// Rule indices along the shortest chain to `target`, base first.
std::vector<int> chain_to(EntityTheory const& theory,
                          std::map<std::string, std::pair<int, int>> const& found,
                          std::string const& target)
{
    std::vector<int> chain;
    auto cur = target;
    while (found.at(cur).second >= 0) {
        int r = found.at(cur).second;
        chain.push_back(r);
        cur = theory.rules[static_cast<std::size_t>(r)].first;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

}  // namespace

std::vector<std::string> World::facts() const
{
    std::vector<std::string> out;
    for (auto const& e : entities) {
        out.push_back(fact_sentence(e.name, e.base_attribute));
    }
    return out;
}

std::vector<std::string> World::rules() const
{
    std::vector<std::string> out;
    for (auto const& e : entities) {
        for (auto const& [from, to] : e.rules) {
            out.push_back(rule_sentence(e.name, from, to));
        }
    }
    return out;
}

World generate_world(WorldConfig const& config)
{
    if (config.n_entities == 0 || config.n_attributes == 0 || config.n_rules == 0) {
        throw ConfigError("entity, attribute and rule counts must be at least 1");
    }
    std::size_t pairs = config.n_attributes * (config.n_attributes - 1) / 2;
    if (config.n_rules > pairs) {
        throw ConfigError(std::to_string(config.n_rules) + " rules per entity but only " + std::to_string(pairs) +
                          " attribute pairs");
    }
    std::mt19937_64 rng(config.seed);
    World world;
    world.seed = config.seed;
    for (std::size_t a = 0; a < config.n_attributes; ++a) {
        world.attributes.push_back(vocab(kAttributes, a, "attr"));
    }
    for (std::size_t e = 0; e < config.n_entities; ++e) {
        EntityTheory theory;
        theory.name = vocab(kEntities, e, "entity");
        auto perm = world.attributes;
        std::shuffle(perm.begin(), perm.end(), rng);
        theory.base_attribute = perm[0];
        // A chain first, then forward shortcuts.
        std::set<std::pair<std::size_t, std::size_t>> used;
        std::size_t chain = std::min(config.n_rules, config.n_attributes - 1);
        for (std::size_t i = 0; i < chain; ++i) {
            used.insert({i, i + 1});
        }
        std::vector<std::pair<std::size_t, std::size_t>> extra;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            for (std::size_t j = i + 1; j < perm.size(); ++j) {
                if (used.count({i, j}) == 0) {
                    extra.emplace_back(i, j);
                }
            }
        }
        std::shuffle(extra.begin(), extra.end(), rng);
        extra.resize(config.n_rules - chain);
        std::vector<std::pair<std::size_t, std::size_t>> all(used.begin(), used.end());
        all.insert(all.end(), extra.begin(), extra.end());
        for (auto const& [i, j] : all) {
            theory.rules.emplace_back(perm[i], perm[j]);
        }
        world.entities.push_back(std::move(theory));
    }
    return world;
}

std::string to_string(Answer a)
{
    switch (a) {
    case Answer::Proved: return "proved";
    case Answer::Disproved: return "disproved";
    case Answer::Unknown: return "unknown";
    }
    return "unknown";
}

Answer answer_from_string(std::string const& s)
{
    auto v = normalize_sentence(s);
    if (v == "proved" || v == "true") {
        return Answer::Proved;
    }
    if (v == "disproved" || v == "false") {
        return Answer::Disproved;
    }
    if (v == "unknown") {
        return Answer::Unknown;
    }
    throw DataError("unknown answer '" + s + "'");
}

std::string TaskInstance::proved_sentence() const
{
    return answer == Answer::Disproved ? logic::negate(hypothesis) : hypothesis;
}

TaskInstance make_instance(World const& world, InstanceSpec const& spec, std::mt19937_64& rng)
{
    if (spec.depth < 0 || spec.depth > 3) {
        throw DepthUnreachable("depth must be within 0..3");
    }
    struct Option {
        std::size_t entity;
        std::string attribute;
    };
    std::vector<Option> options;
    for (std::size_t e = 0; e < world.entities.size(); ++e) {
        auto found = derivations(world.entities[e]);
        for (auto const& attr : world.attributes) {
            auto it = found.find(attr);
            bool hit = spec.answer == Answer::Unknown ? it == found.end()
                                                       : it != found.end() && it->second.first == spec.depth;
            if (hit) {
                options.push_back({e, attr});
            }
        }
    }
    if (options.empty()) {
        throw DepthUnreachable("no entity supports the requested " + to_string(spec.answer) + " instance at depth " +
                               std::to_string(spec.depth));
    }
    auto const& pick = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    auto const& theory = world.entities[pick.entity];
    auto found = derivations(theory);

    TaskInstance inst;
    inst.answer = spec.answer;
    std::string chain_target = pick.attribute;
    if (spec.answer == Answer::Unknown) {
        // Give the entity a plausible-looking chain of its own.
        std::vector<std::string> shallow;
        for (auto const& [attr, d] : found) {
            if (d.first <= 3) {
                shallow.push_back(attr);
            }
        }
        chain_target = shallow[std::uniform_int_distribution<std::size_t>(0, shallow.size() - 1)(rng)];
        bool positive = std::bernoulli_distribution(0.5)(rng);
        inst.hypothesis = fact_sentence(theory.name, pick.attribute, positive);
    } else {
        inst.depth = spec.depth;
        inst.hypothesis = fact_sentence(theory.name, pick.attribute, spec.answer == Answer::Proved);
    }
    auto chain = chain_to(theory, found, chain_target);

    std::vector<std::string> own{fact_sentence(theory.name, theory.base_attribute)};
    for (int r : chain) {
        auto const& [from, to] = theory.rules[static_cast<std::size_t>(r)];
        own.push_back(rule_sentence(theory.name, from, to));
    }

    std::vector<std::string> pool;
    for (std::size_t e = 0; e < world.entities.size(); ++e) {
        if (e == pick.entity) {
            continue;
        }
        auto const& other = world.entities[e];
        pool.push_back(fact_sentence(other.name, other.base_attribute));
        for (auto const& [from, to] : other.rules) {
            pool.push_back(rule_sentence(other.name, from, to));
        }
    }
    std::size_t n_distractors = spec.n_distractors;
    if (spec.context_size) {
        if (*spec.context_size < own.size()) {
            throw ConfigError("context size " + std::to_string(*spec.context_size) + " is smaller than the " +
                              std::to_string(own.size()) + " gold leaves");
        }
        n_distractors = *spec.context_size - own.size();
    }
    if (n_distractors > pool.size()) {
        throw ConfigError("world has " + std::to_string(pool.size()) + " unrelated sentences, " +
                          std::to_string(n_distractors) + " distractors requested");
    }
    std::shuffle(pool.begin(), pool.end(), rng);

    std::vector<std::string> context = own;
    context.insert(context.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_distractors));
    std::vector<std::size_t> order(context.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::uint32_t> position(context.size());  // original index -> sent k
    inst.context.resize(context.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        inst.context[k] = context[order[k]];
        position[order[k]] = static_cast<std::uint32_t>(k + 1);
    }

    if (spec.answer != Answer::Unknown) {
        LinearProof proof;
        if (chain.empty()) {
            proof.steps.push_back({{NodeId::sent(position[0])}, NodeId::hypothesis(), std::nullopt});
        }
        for (std::size_t i = 0; i < chain.size(); ++i) {
            StepText step;
            step.premises.push_back(NodeId::sent(position[i + 1]));
            step.premises.push_back(i == 0 ? NodeId::sent(position[0])
                                           : NodeId::intermediate(static_cast<std::uint32_t>(i)));
            std::sort(step.premises.begin(), step.premises.end());
            if (i + 1 == chain.size()) {
                step.conclusion = NodeId::hypothesis();
            } else {
                step.conclusion = NodeId::intermediate(static_cast<std::uint32_t>(i + 1));
                step.conclusion_text = fact_sentence(theory.name, theory.rules[static_cast<std::size_t>(chain[i])].second);
            }
            proof.steps.push_back(std::move(step));
        }
        inst.gold_proof = std::move(proof);
    }
    return inst;
}

std::uint64_t instance_seed(std::uint64_t dataset_seed, std::uint64_t index)
{
    return splitmix64(splitmix64(dataset_seed) ^ (index + 1) * 0xD1B54A32D192ED03ULL);
}

TaskInstance make_dataset_instance(DatasetConfig const& config, std::size_t index, Answer answer)
{
    if (config.depths.empty()) {
        throw ConfigError("no depths requested");
    }
    std::mt19937_64 rng(instance_seed(config.seed, index));
    InstanceSpec spec;
    spec.depth = config.depths[index % config.depths.size()];
    spec.answer = answer;
    spec.n_distractors = config.n_distractors;
    spec.context_size = config.context_size;
    std::string last_error;
    for (int attempt = 0; attempt < 32; ++attempt) {
        WorldConfig wc = config.world;
        wc.seed = rng();
        auto world = generate_world(wc);
        try {
            auto inst = make_instance(world, spec, rng);
            inst.id = "synth-" + std::to_string(config.seed) + "-" + std::to_string(index);
            return inst;
        } catch (DepthUnreachable const& e) {
            last_error = e.what();
        }
    }
    throw DepthUnreachable("instance " + std::to_string(index) + ": " + last_error);
}

std::vector<TaskInstance> make_dataset(DatasetConfig const& config)
{
    std::size_t total = config.answer_weights[0] + config.answer_weights[1] + config.answer_weights[2];
    if (total == 0) {
        throw ConfigError("answer weights sum to zero");
    }
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (std::size_t a = 0; a < 3; ++a) {
        double exact = static_cast<double>(config.n * config.answer_weights[a]) / static_cast<double>(total);
        counts[a] = static_cast<std::size_t>(exact);
        remainder[a] = exact - static_cast<double>(counts[a]);
        assigned += counts[a];
    }
    while (assigned < config.n) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < 3; ++a) {
            if (remainder[a] > remainder[best]) {
                best = a;
            }
        }
        ++counts[best];
        remainder[best] = -1.0;
        ++assigned;
    }
    std::vector<Answer> answers;
    for (std::size_t a = 0; a < 3; ++a) {
        answers.insert(answers.end(), counts[a], static_cast<Answer>(a));
    }
    std::mt19937_64 rng(splitmix64(config.seed));
    std::shuffle(answers.begin(), answers.end(), rng);

    std::vector<TaskInstance> out;
    out.reserve(config.n);
    for (std::size_t i = 0; i < config.n; ++i) {
        out.push_back(make_dataset_instance(config, i, answers[i]));
    }
    return out;
}

nlohmann::ordered_json instance_to_json(TaskInstance const& inst)
{
    nlohmann::ordered_json context = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < inst.context.size(); ++k) {
        context["sent" + std::to_string(k + 1)] = inst.context[k];
    }
    nlohmann::ordered_json j;
    j["id"] = inst.id;
    j["hypothesis"] = inst.hypothesis;
    j["context"] = context;
    if (inst.gold_proof) {
        j["proof"] = serialize_proof(*inst.gold_proof);
    } else {
        j["proof"] = nullptr;
    }
    j["answer"] = to_string(inst.answer);
    j["depth"] = inst.depth;
    return j;
}

namespace {

std::vector<std::string> context_from_string(std::string const& text)
{
    // "sent1: ... sent2: ..." as in EntailmentBank releases.
    std::map<std::uint32_t, std::string> parts;
    std::size_t pos = 0;
    std::optional<std::uint32_t> current;
    std::size_t body_start = 0;
    auto flush = [&](std::size_t end) {
        if (current) {
            parts[*current] = trim(std::string_view(text).substr(body_start, end - body_start));
        }
    };
    while ((pos = text.find("sent", pos)) != std::string::npos) {
        std::size_t d = pos + 4;
        std::size_t e = d;
        while (e < text.size() && std::isdigit(static_cast<unsigned char>(text[e])) != 0) {
            ++e;
        }
        bool label = e > d && e < text.size() && text[e] == ':' &&
                     (pos == 0 || std::isspace(static_cast<unsigned char>(text[pos - 1])) != 0);
        if (!label) {
            pos = d;
            continue;
        }
        flush(pos);
        current = static_cast<std::uint32_t>(std::stoul(text.substr(d, e - d)));
        body_start = e + 1;
        pos = e + 1;
    }
    flush(text.size());
    std::vector<std::string> out;
    for (auto const& [k, s] : parts) {
        if (k != out.size() + 1) {
            throw DataError("context labels are not contiguous at sent" + std::to_string(k));
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace

TaskInstance instance_from_json(nlohmann::json const& j)
{
    TaskInstance inst;
    try {
        inst.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
        inst.hypothesis = j.at("hypothesis").get<std::string>();
        auto const& ctx = j.at("context");
        if (ctx.is_string()) {
            inst.context = context_from_string(ctx.get<std::string>());
        } else if (ctx.is_array()) {
            inst.context = ctx.get<std::vector<std::string>>();
        } else {
            std::map<std::uint32_t, std::string> ordered;
            for (auto const& [key, value] : ctx.items()) {
                auto id = NodeId::from_string(key);
                if (!id || !id->is_sent()) {
                    throw DataError("bad context key '" + key + "'");
                }
                ordered[id->index] = value.get<std::string>();
            }
            for (auto const& [k, s] : ordered) {
                if (k != inst.context.size() + 1) {
                    throw DataError("context labels are not contiguous at sent" + std::to_string(k));
                }
                inst.context.push_back(s);
            }
        }
        if (j.contains("answer")) {
            auto const& a = j.at("answer");
            if (a.is_boolean()) {
                inst.answer = a.get<bool>() ? Answer::Proved : Answer::Disproved;
            } else {
                inst.answer = answer_from_string(a.get<std::string>());
            }
        } else {
            inst.answer = Answer::Proved;
            inst.answer_labelled = false;
        }
        if (j.contains("proof") && j.at("proof").is_string() && !trim(j.at("proof").get<std::string>()).empty()) {
            inst.gold_proof = parse_proof(j.at("proof").get<std::string>(), inst.context.size());
        }
        if (j.contains("depth") && j.at("depth").is_number_integer()) {
            inst.depth = j.at("depth").get<int>();
        } else if (inst.gold_proof) {
            inst.depth = static_cast<int>(inst.gold_proof->steps.size());
        }
    } catch (nlohmann::json::exception const& e) {
        throw DataError("instance record: " + std::string(e.what()));
    } catch (ProofFormatError const& e) {
        throw DataError("instance '" + inst.id + "': " + e.what());
    }
    return inst;
}

}  // namespace entail
