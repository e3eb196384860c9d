#include "entail/bridge.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <functional>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

#include "entail/errors.hpp"

namespace entail {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

nlohmann::json parse_reply(std::string const& text)
{
    auto reply = nlohmann::json::parse(text, nullptr, false);
    if (reply.is_discarded() || !reply.is_object()) {
        throw BridgeProtocolError("malformed JSON reply: " + text.substr(0, 200));
    }
    if (reply.contains("error")) {
        throw BridgeProtocolError("bridge error: " + reply["error"].dump());
    }
    return reply;
}

}  // namespace

double checked_score(nlohmann::json const& v)
{
    if (!v.is_number()) {
        throw BridgeProtocolError("score is not a number: " + v.dump());
    }
    double s = v.get<double>();
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
        throw BridgeProtocolError("score out of range: " + v.dump());
    }
    return s;
}

// ---------------------------------------------------------------------------

ProcessChannel::ProcessChannel(std::string command, std::chrono::milliseconds timeout)
    : m_command(std::move(command)), m_timeout(timeout)
{
    std::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0) {
        throw BridgeUnavailable("pipe: " + std::string(std::strerror(errno)));
    }
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        throw BridgeUnavailable("pipe: " + std::string(std::strerror(errno)));
    }
    pid_t pid = fork();
    if (pid < 0) {
        throw BridgeUnavailable("fork: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", m_command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    m_pid = pid;
    m_to_child = in_pipe[1];
    m_from_child = out_pipe[0];
    fcntl(m_to_child, F_SETFD, FD_CLOEXEC);
    fcntl(m_from_child, F_SETFD, FD_CLOEXEC);
}

ProcessChannel::~ProcessChannel() { shutdown(); }

void ProcessChannel::shutdown()
{
    if (m_to_child >= 0) {
        close(m_to_child);
        m_to_child = -1;
    }
    if (m_from_child >= 0) {
        close(m_from_child);
        m_from_child = -1;
    }
    if (m_pid > 0) {
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (waitpid(m_pid, &status, WNOHANG) == m_pid) {
                m_pid = -1;
                return;
            }
            usleep(2000);
        }
        kill(m_pid, SIGKILL);
        waitpid(m_pid, &status, 0);
        m_pid = -1;
    }
}

std::string ProcessChannel::request_line(std::string const& line)
{
    std::lock_guard lock(m_mutex);
    if (m_broken || m_pid <= 0) {
        throw BridgeUnavailable("bridge process '" + m_command + "' is not running");
    }
    auto start = Clock::now();
    std::string out = line + "\n";
    size_t written = 0;
    while (written < out.size()) {
        auto n = write(m_to_child, out.data() + written, out.size() - written);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            m_broken = true;
            throw BridgeUnavailable("write to bridge failed: " + std::string(std::strerror(errno)));
        }
        written += static_cast<size_t>(n);
    }
    while (true) {
        auto nl = m_buffer.find('\n');
        if (nl != std::string::npos) {
            std::string reply = m_buffer.substr(0, nl);
            m_buffer.erase(0, nl + 1);
            m_last_latency_ms = elapsed_ms(start);
            return reply;
        }
        auto remaining = m_timeout.count() - static_cast<long long>(elapsed_ms(start));
        if (remaining <= 0) {
            m_broken = true;
            throw BridgeTimeout("bridge did not answer within " + std::to_string(m_timeout.count()) + " ms");
        }
        pollfd pfd{m_from_child, POLLIN, 0};
        int r = poll(&pfd, 1, static_cast<int>(remaining));
        if (r < 0 && errno == EINTR) {
            continue;
        }
        if (r == 0) {
            continue;
        }
        char buf[4096];
        auto n = read(m_from_child, buf, sizeof buf);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) {
                continue;
            }
            m_broken = true;
            throw BridgeUnavailable("bridge process closed its output");
        }
        m_buffer.append(buf, static_cast<size_t>(n));
    }
}

nlohmann::json ProcessChannel::request(nlohmann::json const& message)
{
    return parse_reply(request_line(message.dump()));
}

// ---------------------------------------------------------------------------

HttpChannel::HttpChannel(std::string url, std::chrono::milliseconds timeout) : m_timeout(timeout)
{
    constexpr std::string_view scheme = "http://";
    std::string_view rest(url);
    if (!rest.starts_with(scheme)) {
        throw BridgeUnavailable("not an http endpoint: " + url);
    }
    rest.remove_prefix(scheme.size());
    auto slash = rest.find('/');
    m_host = std::string(scheme) + std::string(rest.substr(0, slash));
    m_path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
}

std::string HttpChannel::request_raw(std::string const& body)
{
    std::lock_guard lock(m_mutex);
    httplib::Client client(m_host);
    auto secs = m_timeout.count() / 1000;
    auto usecs = (m_timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto start = Clock::now();
    auto res = client.Post(m_path, body, "application/json");
    m_last_latency_ms = elapsed_ms(start);
    if (!res) {
        auto err = res.error();
        if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
            throw BridgeTimeout("http bridge timed out: " + httplib::to_string(err));
        }
        throw BridgeUnavailable("http bridge unreachable: " + httplib::to_string(err));
    }
    if (res->status != 200) {
        auto reply = nlohmann::json::parse(res->body, nullptr, false);
        if (!reply.is_discarded() && reply.is_object() && reply.contains("error")) {
            return res->body;
        }
        throw BridgeProtocolError("http status " + std::to_string(res->status));
    }
    return res->body;
}

nlohmann::json HttpChannel::request(nlohmann::json const& message)
{
    return parse_reply(request_raw(message.dump()));
}

std::shared_ptr<BridgeChannel> open_channel(std::string const& endpoint, std::chrono::milliseconds timeout)
{
    if (endpoint.starts_with("http://")) {
        return std::make_shared<HttpChannel>(endpoint, timeout);
    }
    return std::make_shared<ProcessChannel>(endpoint, timeout);
}

// ---------------------------------------------------------------------------

ExternalSource::ExternalSource(std::shared_ptr<BridgeChannel> channel) : m_channel(std::move(channel)) {}

std::vector<Candidate> ExternalSource::generate(std::string const& hypothesis,
                                                std::vector<std::string> const& context,
                                                LinearProof const& partial,
                                                std::size_t n)
{
    nlohmann::json req = {{"op", "generate"},
                          {"hypothesis", hypothesis},
                          {"context", context},
                          {"partial_proof", partial.empty() ? std::string() : serialize_proof(partial)},
                          {"n", n}};
    auto reply = m_channel->request(req);
    if (!reply.contains("candidates") || !reply["candidates"].is_array()) {
        throw BridgeProtocolError("reply has no candidate list");
    }
    std::vector<Candidate> out;
    for (auto const& c : reply["candidates"]) {
        if (!c.is_object() || !c.contains("step") || !c["step"].is_string() || !c.contains("score")) {
            throw BridgeProtocolError("malformed candidate: " + c.dump());
        }
        double score = checked_score(c["score"]);
        StepText step;
        try {
            step = parse_step(c["step"].get<std::string>());
        } catch (ProofFormatError const&) {
            continue;  // ill-formed model output is filtered, not fatal
        }
        if (out.size() < n) {
            out.push_back({std::move(step), score});
        }
    }
    return out;
}

ExternalScorer::ExternalScorer(std::shared_ptr<BridgeChannel> channel, std::uint64_t seed)
    : m_channel(std::move(channel)), m_rng(seed)
{}

double ExternalScorer::send(std::vector<std::string> premises, std::string const& conclusion, bool hypothesis_role)
{
    {
        std::lock_guard lock(m_mutex);
        std::shuffle(premises.begin(), premises.end(), m_rng);
    }
    nlohmann::json req = {{"op", "score"}, {"premises", premises}, {"conclusion", conclusion}};
    if (hypothesis_role) {
        req["role"] = "hypothesis";
    }
    auto reply = m_channel->request(req);
    if (!reply.contains("score")) {
        throw BridgeProtocolError("reply has no score");
    }
    return checked_score(reply["score"]);
}

double ExternalScorer::score(std::vector<std::string> const& premises, std::string const& conclusion)
{
    return send(premises, conclusion, false);
}

double ExternalScorer::score_hypothesis_step(std::vector<std::string> const& premises, std::string const& hypothesis)
{
    return send(premises, hypothesis, true);
}

// ---------------------------------------------------------------------------

bool ConformanceReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](Check const& c) { return c.passed; });
}

ConformanceReport check_bridge(std::string const& endpoint,
                               std::chrono::milliseconds timeout,
                               std::size_t fuzz_cases,
                               std::uint64_t seed)
{
    ConformanceReport report;
    std::function<std::string(std::string const&)> send;
    std::shared_ptr<BridgeChannel> channel;
    try {
        channel = open_channel(endpoint, timeout);
    } catch (BridgeError const& e) {
        report.checks.push_back({"connect", false, e.what()});
        return report;
    }
    if (auto* proc = dynamic_cast<ProcessChannel*>(channel.get())) {
        send = [proc](std::string const& line) { return proc->request_line(line); };
    } else {
        auto* http = dynamic_cast<HttpChannel*>(channel.get());
        send = [http](std::string const& body) { return http->request_raw(body); };
    }

    auto record = [&](std::string name, auto&& fn) {
        try {
            auto detail = fn();
            report.checks.push_back({std::move(name), detail.empty(), detail});
        } catch (std::exception const& e) {
            report.checks.push_back({std::move(name), false, e.what()});
        }
    };

    record("generate: in-range candidates", [&]() -> std::string {
        ExternalSource source(channel);
        auto c = source.generate("bob is red.", {"bob is big.", "if bob is big then bob is red."}, {}, 5);
        return c.size() <= 5 ? "" : "more candidates than requested";
    });
    record("score: in-range value", [&]() -> std::string {
        ExternalScorer scorer(channel, seed);
        scorer.score({"bob is big.", "if bob is big then bob is red."}, "bob is red.");
        return "";
    });

    auto expect_error = [&](std::string const& line) -> std::string {
        auto reply = nlohmann::json::parse(send(line), nullptr, false);
        if (reply.is_discarded() || !reply.is_object()) {
            return "reply is not a JSON object";
        }
        return reply.contains("error") ? "" : "malformed request accepted: " + reply.dump().substr(0, 120);
    };
    record("malformed JSON", [&] { return expect_error("{\"op\": \"generate\", "); });
    record("unknown op", [&] { return expect_error(R"({"op":"explode"})"); });
    record("missing fields", [&] { return expect_error(R"({"op":"score"})"); });
    record("wrong types", [&] { return expect_error(R"({"op":"generate","hypothesis":3,"context":"x","n":"two"})"); });
    record("negative n", [&] {
        return expect_error(R"({"op":"generate","hypothesis":"h","context":[],"partial_proof":"","n":-1})");
    });

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> byte(0x20, 0x7e);
    std::uniform_int_distribution<int> len(0, 64);
    std::size_t failures = 0;
    std::string first_failure;
    for (std::size_t i = 0; i < fuzz_cases; ++i) {
        std::string line;
        auto l = len(rng);
        for (int k = 0; k < l; ++k) {
            line.push_back(static_cast<char>(byte(rng)));
        }
        if (i % 2 == 0) {
            line = R"({"op":"generate","hypothesis":)" + line;  // truncated/garbled JSON
        }
        std::string detail;
        try {
            detail = expect_error(line);
        } catch (std::exception const& e) {
            detail = e.what();
        }
        if (!detail.empty()) {
            ++failures;
            if (first_failure.empty()) {
                first_failure = detail;
            }
        }
    }
    report.checks.push_back({"fuzzed malformed requests (" + std::to_string(fuzz_cases) + ")", failures == 0,
                             first_failure});
    record("still serving after fuzzing", [&]() -> std::string {
        ExternalScorer scorer(channel, seed);
        scorer.score({"bob is big."}, "bob is big.");
        return "";
    });
    return report;
}

}  // namespace entail
