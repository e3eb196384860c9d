#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include <httplib.h>

#include "entail/bridge.hpp"
#include "entail/errors.hpp"

using namespace entail;
using namespace std::chrono_literals;

namespace {

std::string stub(std::string const& args = {})
{
    return std::string(STUB_BRIDGE) + (args.empty() ? "" : " " + args);
}

}  // namespace

TEST(CheckedScore, RangeAndType)
{
    EXPECT_EQ(checked_score(0.25), 0.25);
    EXPECT_EQ(checked_score(0), 0.0);
    EXPECT_EQ(checked_score(1), 1.0);
    EXPECT_THROW(checked_score(1.5), BridgeProtocolError);
    EXPECT_THROW(checked_score(-0.1), BridgeProtocolError);
    EXPECT_THROW(checked_score("0.5"), BridgeProtocolError);
    EXPECT_THROW(checked_score(nullptr), BridgeProtocolError);
    EXPECT_THROW(checked_score(std::nan("")), BridgeProtocolError);
}

TEST(ProcessChannel, GenerateAndScore)
{
    auto ch = std::make_shared<ProcessChannel>(stub("--score 0.7 --step 'sent1 & sent2 -> hypothesis'"), 5000ms);
    ExternalSource src(ch);
    auto cands = src.generate("h.", {"a.", "b."}, LinearProof{}, 3);
    ASSERT_EQ(cands.size(), 1u);
    EXPECT_EQ(cands[0].step.premises, (std::vector<NodeId>{NodeId::sent(1), NodeId::sent(2)}));
    EXPECT_TRUE(cands[0].step.conclusion.is_hypothesis());
    EXPECT_DOUBLE_EQ(cands[0].score, 0.7);

    ExternalScorer scorer(ch, 1);
    EXPECT_DOUBLE_EQ(scorer.score({"a.", "b."}, "c."), 0.7);
    EXPECT_DOUBLE_EQ(scorer.score_hypothesis_step({"a."}, "h."), 0.7);
    EXPECT_GE(ch->last_latency_ms(), 0.0);
}

TEST(ProcessChannel, ErrorReplyIsProtocolError)
{
    ProcessChannel ch(stub(), 5000ms);
    EXPECT_THROW(ch.request({{"op", "explode"}}), BridgeProtocolError);
    // The bridge keeps serving after an error reply.
    EXPECT_EQ(ch.request({{"op", "score"}, {"premises", {"a"}}, {"conclusion", "b"}})["score"], 0.5);
}

TEST(ProcessChannel, OutOfRangeScore)
{
    auto ch = std::make_shared<ProcessChannel>(stub("--bad-score"), 5000ms);
    ExternalScorer scorer(ch, 1);
    EXPECT_THROW(scorer.score({"a."}, "b."), BridgeProtocolError);
}

TEST(ProcessChannel, GarbageReply)
{
    auto ch = std::make_shared<ProcessChannel>(stub("--garbage"), 5000ms);
    ExternalScorer scorer(ch, 1);
    EXPECT_THROW(scorer.score({"a."}, "b."), BridgeProtocolError);
}

TEST(ProcessChannel, Timeout)
{
    ProcessChannel ch(stub("--sleep-ms 2000"), 100ms);
    EXPECT_THROW(ch.request({{"op", "score"}, {"premises", {"a"}}, {"conclusion", "b"}}), BridgeTimeout);
    EXPECT_THROW(ch.request({{"op", "score"}, {"premises", {"a"}}, {"conclusion", "b"}}), BridgeUnavailable);
}

TEST(ProcessChannel, BridgeExits)
{
    ProcessChannel ch(stub("--die-after 1"), 5000ms);
    nlohmann::json req{{"op", "score"}, {"premises", {"a"}}, {"conclusion", "b"}};
    EXPECT_NO_THROW(ch.request(req));
    EXPECT_THROW(ch.request(req), BridgeUnavailable);
}

TEST(ProcessChannel, MissingCommand)
{
    ProcessChannel ch("/nonexistent/bridge-binary", 2000ms);
    EXPECT_THROW(ch.request({{"op", "score"}}), BridgeError);
}

TEST(HttpChannel, InProcessServer)
{
    httplib::Server server;
    server.Post("/score", [](httplib::Request const& req, httplib::Response& res) {
        auto j = nlohmann::json::parse(req.body);
        double s = j.at("premises").size() == 2 ? 0.9 : 0.1;
        res.set_content(nlohmann::json{{"score", s}}.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    auto ch = open_channel("http://127.0.0.1:" + std::to_string(port) + "/score", 5000ms);
    ExternalScorer scorer(ch, 3);
    EXPECT_DOUBLE_EQ(scorer.score({"a.", "b."}, "c."), 0.9);
    EXPECT_DOUBLE_EQ(scorer.score({"a."}, "c."), 0.1);

    server.stop();
    th.join();
    EXPECT_THROW(scorer.score({"a."}, "c."), BridgeError);
}

TEST(CheckBridge, StubConforms)
{
    auto report = check_bridge(stub(), 5000ms, 50, 7);
    for (auto const& c : report.checks) {
        EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
    }
    EXPECT_TRUE(report.passed());
}

TEST(CheckBridge, LenientBridgeFails)
{
    EXPECT_FALSE(check_bridge(stub("--accept-all"), 5000ms, 10, 7).passed());
    EXPECT_FALSE(check_bridge(stub("--bad-score"), 5000ms, 10, 7).passed());
    EXPECT_FALSE(check_bridge("/nonexistent/bridge-binary", 1000ms, 0, 7).passed());
}
