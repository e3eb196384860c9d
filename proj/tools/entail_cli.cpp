// entail: dataset generation, verifier data, proof search, evaluation and
// bridge conformance checks.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entail/batch.hpp"
#include "entail/bridge.hpp"
#include "entail/errors.hpp"
#include "entail/eval.hpp"
#include "entail/search.hpp"
#include "entail/synth.hpp"
#include "entail/verifier_data.hpp"

namespace {

using namespace entail;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBridge = 3;

// Output file or stdout for "-".
class Output {
  public:
    explicit Output(std::string const& path)
    {
        if (path != "-") {
            m_file.open(path, std::ios::binary);
            if (!m_file) {
                throw DataError("cannot write " + path);
            }
        }
    }
    std::ostream& stream() { return m_file.is_open() ? static_cast<std::ostream&>(m_file) : std::cout; }

  private:
    std::ofstream m_file;
};

std::vector<nlohmann::json> read_jsonl(std::string const& path)
{
    std::ifstream file;
    std::istream* in = &std::cin;
    if (path != "-") {
        file.open(path, std::ios::binary);
        if (!file) {
            throw DataError("cannot read " + path);
        }
        in = &file;
    }
    std::vector<nlohmann::json> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(*in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw DataError(path + ":" + std::to_string(number) + ": not valid JSON");
        }
        out.push_back(std::move(j));
    }
    return out;
}

std::vector<TaskInstance> read_dataset(std::string const& path)
{
    std::vector<TaskInstance> out;
    std::size_t number = 0;
    for (auto const& j : read_jsonl(path)) {
        ++number;
        try {
            out.push_back(instance_from_json(j));
        } catch (Error const& e) {
            throw DataError(path + ": record " + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

std::array<std::size_t, 3> parse_answer_weights(std::string const& text)
{
    std::array<std::size_t, 3> w{};
    std::istringstream in(text);
    std::string part;
    std::size_t i = 0;
    while (std::getline(in, part, ':')) {
        if (i == 3 || part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
            throw CLI::ValidationError("--answers", "expected proved:disproved:unknown counts, got '" + text + "'");
        }
        w[i++] = std::stoul(part);
    }
    if (i != 3) {
        throw CLI::ValidationError("--answers", "expected proved:disproved:unknown counts, got '" + text + "'");
    }
    return w;
}

// ENTAIL_<OPTION> environment overrides for every long option.
void add_env_overrides(CLI::App& app)
{
    for (auto* opt : app.get_options()) {
        auto name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config" || opt->get_configurable() == false) {
            continue;
        }
        std::string env = "ENTAIL_";
        for (char c : name) {
            env.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        }
        if (opt->get_envname().empty()) {
            opt->envname(env);
        }
    }
    for (auto* sub : app.get_subcommands({})) {
        add_env_overrides(*sub);
    }
}

// ---------------------------------------------------------------------------

struct GenDataArgs {
    DatasetConfig config;
    std::size_t context_size = 0;
    std::string answers = "1:1:1";
    std::string output = "-";
};

int cmd_gen_data(GenDataArgs& a)
{
    a.config.answer_weights = parse_answer_weights(a.answers);
    if (a.context_size > 0) {
        a.config.context_size = a.context_size;
    }
    a.config.world.seed = a.config.seed;
    Output out(a.output);
    for (auto const& inst : make_dataset(a.config)) {
        out.stream() << instance_to_json(inst).dump() << '\n';
    }
    return 0;
}

struct GenNegativesArgs {
    std::string input;
    std::string output = "-";
    VerifierDataConfig config;
};

int cmd_gen_negatives(GenNegativesArgs const& a)
{
    auto data = read_dataset(a.input);
    auto steps = make_verifier_data(data, a.config);
    Output out(a.output);
    std::size_t pos = 0;
    for (auto const& s : steps) {
        pos += s.label == Label::Positive ? 1 : 0;
        out.stream() << labeled_step_to_json(s).dump() << '\n';
    }
    std::cerr << "positives " << pos << ", negatives " << steps.size() - pos << "\n";
    return 0;
}

struct SearchArgs {
    std::string input;
    std::string output = "-";
    std::string prover = "exact";
    std::string verifier = "exact";
    std::string endpoint;
    std::string verifier_endpoint;
    int timeout_ms = 30000;
    double drop = 0.3;
    double inject = 0.3;
    bool no_search = false;
    bool no_negation = false;
    std::string score_mix = "average";
    std::string preset;
    std::string trace;
    SearchConfig search;
    int jobs = 1;
};

int cmd_search(SearchArgs& a)
{
    if (!a.preset.empty()) {
        if (a.preset == "no-search") {
            a.no_search = true;
        } else if (a.preset == "no-prover-score") {
            a.score_mix = "verifier-only";
        } else if (a.preset == "no-verifier-score") {
            a.score_mix = "prover-only";
        } else if (a.preset != "full") {
            throw CLI::ValidationError("--preset", "unknown preset '" + a.preset + "'");
        }
    }
    a.search.search = !a.no_search;
    a.search.score_mix = score_mix_from_string(a.score_mix);
    a.search.validate();

    auto data = read_dataset(a.input);
    auto timeout = std::chrono::milliseconds(a.timeout_ms);
    std::shared_ptr<BridgeChannel> prover_channel;
    std::shared_ptr<BridgeChannel> verifier_channel;
    if (a.prover == "external" || a.verifier == "external") {
        if (a.endpoint.empty()) {
            throw CLI::ValidationError("--endpoint", "external sources need --endpoint");
        }
        prover_channel = open_channel(a.endpoint, timeout);
        verifier_channel = a.verifier_endpoint.empty() ? prover_channel : open_channel(a.verifier_endpoint, timeout);
    }
    BuiltinSources builtin;
    builtin.prover = a.prover == "external" ? "exact" : a.prover;
    builtin.verifier = a.verifier == "external" ? "exact" : a.verifier;
    builtin.drop = a.drop;
    builtin.inject = a.inject;
    builtin.seed = a.search.seed;
    auto base = builtin_factory(builtin);
    SourceFactory factory = [&](TaskInstance const& inst, std::size_t index, bool negated) {
        auto s = base(inst, index, negated);
        if (a.prover == "external") {
            s.prover = std::make_unique<ExternalSource>(prover_channel);
        }
        if (a.verifier == "external") {
            s.verifier = std::make_unique<ExternalScorer>(verifier_channel, instance_seed(a.search.seed, index));
        }
        return s;
    };

    BatchConfig batch;
    batch.search = a.search;
    batch.negation = !a.no_negation;
    batch.jobs = a.jobs;
    std::unique_ptr<Output> trace;
    if (!a.trace.empty()) {
        trace = std::make_unique<Output>(a.trace);
        batch.trace = [&](std::string const& id, bool negated, nlohmann::json const& record) {
            nlohmann::ordered_json line;
            line["id"] = id;
            line["negated"] = negated;
            for (auto const& [k, v] : record.items()) {
                line[k] = v;
            }
            trace->stream() << line.dump() << '\n';
        };
    }

    auto predictions = run_batch(data, factory, batch);
    Output out(a.output);
    std::vector<std::string> failures;
    bool bridge_failure = false;
    for (auto const& p : predictions) {
        out.stream() << prediction_to_json(p).dump() << '\n';
        for (auto const* at : {&p.hypothesis, p.negation ? &*p.negation : nullptr}) {
            if (at != nullptr && at->error) {
                failures.push_back(p.id + ": " + *at->error);
                bridge_failure = bridge_failure || at->bridge_failure;
            }
        }
    }
    std::size_t proved = std::count_if(predictions.begin(), predictions.end(),
                                       [](Prediction const& p) { return p.hypothesis.proof.has_value(); });
    std::cerr << "instances " << predictions.size() << ", with a proof of h " << proved << ", failures "
              << failures.size() << "\n";
    for (auto const& f : failures) {
        std::cerr << "  " << f << "\n";
    }
    return bridge_failure ? kExitBridge : 0;
}

struct EvalArgs {
    std::string gold;
    std::string predictions;
    std::string output = "-";
    std::string csv;
    std::string classifier;
    EvalOptions options;
};

int cmd_eval(EvalArgs& a)
{
    auto gold = read_dataset(a.gold);
    std::map<std::string, std::size_t> context_size;
    for (auto const& g : gold) {
        context_size[g.id] = g.context.size();
    }
    if (!a.classifier.empty()) {
        std::ifstream in(a.classifier);
        auto j = nlohmann::json::parse(in, nullptr, false);
        if (!in || j.is_discarded()) {
            throw DataError("cannot read classifier weights from " + a.classifier);
        }
        a.options.classifier = AnswerClassifier::from_json(j);
    }
    std::vector<Prediction> predictions;
    std::vector<std::string> unparsable;
    for (auto const& j : read_jsonl(a.predictions)) {
        std::string id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : "?";
        auto it = context_size.find(id);
        if (it == context_size.end()) {
            std::cerr << "warning: prediction for unknown id " << id << "\n";
            continue;
        }
        try {
            predictions.push_back(prediction_from_json(j, it->second));
        } catch (DataError const& e) {
            unparsable.push_back(e.what());
        }
    }
    auto report = evaluate(gold, predictions, a.options);
    for (auto const& u : unparsable) {
        report.warnings.push_back(u);
    }
    Output out(a.output);
    out.stream() << report.to_json().dump(2) << '\n';
    if (!a.csv.empty()) {
        Output csv(a.csv);
        csv.stream() << report.breakdown_csv();
    }
    std::cerr << report.table();
    for (auto const& w : report.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    for (auto const& m : report.missing) {
        std::cerr << "missing prediction: " << m << "\n";
    }
    return unparsable.empty() ? 0 : kExitData;
}

struct CheckBridgeArgs {
    std::string endpoint;
    int timeout_ms = 5000;
    std::size_t fuzz_cases = 200;
    std::uint64_t seed = 0;
};

int cmd_check_bridge(CheckBridgeArgs const& a)
{
    auto report = check_bridge(a.endpoint, std::chrono::milliseconds(a.timeout_ms), a.fuzz_cases, a.seed);
    for (auto const& c : report.checks) {
        std::cout << (c.passed ? "ok   " : "FAIL ") << c.name;
        if (!c.passed && !c.detail.empty()) {
            std::cout << ": " << c.detail;
        }
        std::cout << "\n";
    }
    return report.passed() ? 0 : kExitBridge;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Proof search over entailment trees"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value config file; explicit flags win");
    app.allow_config_extras(CLI::config_extras_mode::error);

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic rule-reasoning dataset");
    gen_cmd->add_option("--entities", gen.config.world.n_entities, "Entities per world")->capture_default_str();
    gen_cmd->add_option("--attributes", gen.config.world.n_attributes, "Attributes per world")->capture_default_str();
    gen_cmd->add_option("--rules", gen.config.world.n_rules, "Rules per entity")->capture_default_str();
    gen_cmd->add_option("--n", gen.config.n, "Number of instances")->capture_default_str();
    gen_cmd->add_option("--depths", gen.config.depths, "Proof depths to cycle through")
        ->check(CLI::Range(0, 3))
        ->capture_default_str();
    gen_cmd->add_option("--distractors", gen.config.n_distractors, "Distractor sentences per instance")
        ->capture_default_str();
    gen_cmd->add_option("--context-size", gen.context_size, "Pad every context to this size (overrides --distractors)");
    gen_cmd->add_option("--answers", gen.answers, "Answer mix proved:disproved:unknown")->capture_default_str();
    gen_cmd->add_option("--seed", gen.config.seed, "Random seed")->required();
    gen_cmd->add_option("--output,-o", gen.output, "Output JSONL, - for stdout")->capture_default_str();

    GenNegativesArgs neg;
    auto* neg_cmd = app.add_subcommand("gen-negatives", "Verifier training data: gold steps and pseudo-negatives");
    neg_cmd->add_option("--input,-i", neg.input, "Dataset JSONL")->required();
    neg_cmd->add_option("--output,-o", neg.output, "Output JSONL, - for stdout")->capture_default_str();
    neg_cmd->add_option("--removed", neg.config.weights.removed, "Premise-removal negatives per step")
        ->capture_default_str();
    neg_cmd->add_option("--swapped", neg.config.weights.swapped, "Distractor-swap negatives per step")
        ->capture_default_str();
    neg_cmd->add_option("--copied", neg.config.weights.copied, "Premise-copy negatives per step")->capture_default_str();
    neg_cmd->add_option("--negated", neg.config.weights.negated, "Negated-conclusion negatives per step")
        ->capture_default_str();
    neg_cmd->add_flag("--corpus-pool", neg.config.corpus_pool, "Retrieve distractors from every context");
    neg_cmd->add_option("--jobs,-j", neg.config.jobs, "Worker threads")->capture_default_str();
    neg_cmd->add_option("--seed", neg.config.seed, "Random seed")->required();

    SearchArgs search;
    auto* search_cmd = app.add_subcommand("search", "Prove every hypothesis in a dataset");
    search_cmd->add_option("--input,-i", search.input, "Dataset JSONL")->required();
    search_cmd->add_option("--output,-o", search.output, "Predictions JSONL, - for stdout")->capture_default_str();
    search_cmd->add_option("--prover", search.prover, "Step source")
        ->check(CLI::IsMember({"exact", "noisy", "oracle", "external"}))
        ->capture_default_str();
    search_cmd->add_option("--verifier", search.verifier, "Step scorer")
        ->check(CLI::IsMember({"exact", "oracle", "external"}))
        ->capture_default_str();
    search_cmd->add_option("--endpoint", search.endpoint, "Bridge command or http:// URL");
    search_cmd->add_option("--verifier-endpoint", search.verifier_endpoint, "Separate bridge for the verifier");
    search_cmd->add_option("--timeout-ms", search.timeout_ms, "Bridge request timeout")->capture_default_str();
    search_cmd->add_option("--drop", search.drop, "Noisy prover: drop probability")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    search_cmd->add_option("--inject", search.inject, "Noisy prover: hallucination probability")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    search_cmd->add_flag("--no-search", search.no_search, "Greedy proof only");
    search_cmd->add_flag("--no-negation", search.no_negation, "Skip the search for the negated hypothesis");
    search_cmd->add_option("--score-mix", search.score_mix, "Step score")
        ->check(CLI::IsMember({"average", "prover-only", "verifier-only"}))
        ->capture_default_str();
    search_cmd->add_option("--preset", search.preset, "full, no-search, no-prover-score or no-verifier-score");
    search_cmd->add_option("--candidates", search.search.num_candidates, "Candidates per prover call")
        ->capture_default_str();
    search_cmd->add_option("--max-iterations", search.search.max_iterations, "Search iterations")->capture_default_str();
    search_cmd->add_option("--patience", search.search.patience, "Stop after this many idle iterations")
        ->capture_default_str();
    search_cmd->add_option("--min-improvement", search.search.min_improvement, "Smallest score gain that counts")
        ->capture_default_str();
    search_cmd->add_option("--trace", search.trace, "Per-iteration JSONL trace");
    search_cmd->add_option("--jobs,-j", search.jobs, "Worker threads")->capture_default_str();
    search_cmd->add_option("--seed", search.search.seed, "Random seed")->required();

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against a gold dataset");
    eval_cmd->add_option("--gold,-g", ev.gold, "Dataset JSONL")->required();
    eval_cmd->add_option("--predictions,-p", ev.predictions, "Predictions JSONL")->required();
    eval_cmd->add_option("--output,-o", ev.output, "Report JSON, - for stdout")->capture_default_str();
    eval_cmd->add_option("--csv", ev.csv, "Depth breakdown CSV");
    eval_cmd->add_option("--threshold", ev.options.similarity_threshold, "Token-F1 threshold for intermediates")
        ->capture_default_str();
    eval_cmd->add_option("--classifier", ev.classifier, "Answer classifier weights JSON");
    eval_cmd->add_flag("--fit-classifier", ev.options.fit_classifier, "Fit the answer classifier on these scores");
    std::uint64_t eval_seed = 0;
    eval_cmd->add_option("--seed", eval_seed, "Accepted for uniformity; evaluation is deterministic");

    CheckBridgeArgs cb;
    auto* cb_cmd = app.add_subcommand("check-bridge", "Protocol conformance and fuzz checks against a bridge");
    cb_cmd->add_option("--endpoint", cb.endpoint, "Bridge command or http:// URL")->required();
    cb_cmd->add_option("--timeout-ms", cb.timeout_ms, "Request timeout")->capture_default_str();
    cb_cmd->add_option("--fuzz-cases", cb.fuzz_cases, "Random malformed requests")->capture_default_str();
    cb_cmd->add_option("--seed", cb.seed, "Random seed")->capture_default_str();

    add_env_overrides(app);

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*gen_cmd) {
            return cmd_gen_data(gen);
        }
        if (*neg_cmd) {
            return cmd_gen_negatives(neg);
        }
        if (*search_cmd) {
            return cmd_search(search);
        }
        if (*eval_cmd) {
            return cmd_eval(ev);
        }
        if (*cb_cmd) {
            return cmd_check_bridge(cb);
        }
    } catch (CLI::ParseError const& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    } catch (ConfigError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (BridgeError const& e) {
        std::cerr << "bridge error: " << e.what() << "\n";
        return kExitBridge;
    } catch (Error const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
