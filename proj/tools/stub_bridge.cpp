// Stand-in bridge speaking the step-source wire protocol with canned
// answers. Used by the tests and for trying out `entail check-bridge`.

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

namespace {

struct Behaviour {
    double score = 0.5;
    bool bad_score = false;
    bool garbage = false;
    bool accept_all = false;
    int sleep_ms = 0;
    long die_after = -1;
    std::string step = "sent1 -> hypothesis";
};

bool string_array(nlohmann::json const& j)
{
    if (!j.is_array()) {
        return false;
    }
    for (auto const& x : j) {
        if (!x.is_string()) {
            return false;
        }
    }
    return true;
}

std::string error(std::string const& what)
{
    return nlohmann::json{{"error", what}}.dump();
}

std::string respond(std::string const& line, Behaviour const& b)
{
    if (b.sleep_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(b.sleep_ms));
    }
    if (b.garbage) {
        return "this is not json";
    }
    double score = b.bad_score ? 1.5 : b.score;
    auto req = nlohmann::json::parse(line, nullptr, false);
    if (b.accept_all) {
        return nlohmann::json{{"score", score}, {"candidates", nlohmann::json::array()}}.dump();
    }
    if (req.is_discarded() || !req.is_object()) {
        return error("request is not a JSON object");
    }
    if (!req.contains("op") || !req["op"].is_string()) {
        return error("missing op");
    }
    auto op = req["op"].get<std::string>();
    if (op == "generate") {
        if (!req.contains("hypothesis") || !req["hypothesis"].is_string() || !req.contains("context") ||
            !string_array(req["context"]) || !req.contains("partial_proof") || !req["partial_proof"].is_string() ||
            !req.contains("n") || !req["n"].is_number_integer() || req["n"].get<long long>() < 0) {
            return error("generate needs hypothesis, context, partial_proof and n >= 0");
        }
        auto cands = nlohmann::json::array();
        if (req["n"].get<long long>() > 0 && !req["context"].empty()) {
            cands.push_back({{"step", b.step}, {"score", score}});
        }
        return nlohmann::json{{"candidates", cands}}.dump();
    }
    if (op == "score") {
        if (!req.contains("premises") || !string_array(req["premises"]) || req["premises"].empty() ||
            !req.contains("conclusion") || !req["conclusion"].is_string() ||
            (req.contains("role") && !req["role"].is_string())) {
            return error("score needs nonempty premises and a conclusion");
        }
        return nlohmann::json{{"score", score}}.dump();
    }
    return error("unknown op '" + op + "'");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Canned step-source bridge"};
    Behaviour b;
    int port = -1;
    app.add_option("--score", b.score, "Score returned for every request");
    app.add_option("--step", b.step, "Step returned by generate");
    app.add_flag("--bad-score", b.bad_score, "Answer with out-of-range scores");
    app.add_flag("--garbage", b.garbage, "Answer with non-JSON text");
    app.add_flag("--accept-all", b.accept_all, "Never report errors");
    app.add_option("--sleep-ms", b.sleep_ms, "Delay before every reply");
    app.add_option("--die-after", b.die_after, "Exit after this many requests");
    app.add_option("--http", port, "Serve HTTP on this port instead of stdio (0 picks one)");
    CLI11_PARSE(app, argc, argv);

    long served = 0;
    if (port >= 0) {
        httplib::Server server;
        server.Post("/", [&](httplib::Request const& req, httplib::Response& res) {
            res.set_content(respond(req.body, b), "application/json");
            if (b.die_after >= 0 && ++served >= b.die_after) {
                server.stop();
            }
        });
        int bound = port == 0 ? server.bind_to_any_port("127.0.0.1") : port;
        if (port != 0 && !server.bind_to_port("127.0.0.1", port)) {
            std::cerr << "cannot bind port " << port << "\n";
            return 1;
        }
        std::cout << "listening " << bound << std::endl;
        server.listen_after_bind();
        return 0;
    }

    std::string line;
    while (std::getline(std::cin, line)) {
        std::cout << respond(line, b) << std::endl;
        if (b.die_after >= 0 && ++served >= b.die_after) {
            break;
        }
    }
    return 0;
}
