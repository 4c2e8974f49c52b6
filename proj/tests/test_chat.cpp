// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "evince/chat.hpp"
#include "evince/error.hpp"

using namespace evince;
using namespace evince::chat;

namespace {

/// Local HTTP server on an ephemeral port, stopped on destruction.
class LocalServer {
public:
    LocalServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer() {
        server_.stop();
        thread_.join();
    }

    httplib::Server& server() { return server_; }
    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

AgentProfile chat_profile(const std::string& provider, const std::string& url) {
    AgentProfile p;
    p.id = provider + "-agent";
    p.kind = AgentKind::ChatBackend;
    p.provider = provider;
    p.model = "test-model";
    p.endpoint = url;
    p.request_timeout = std::chrono::seconds(2);
    return p;
}

Request simple_request() {
    Request r;
    r.model = "test-model";
    r.messages = {{"system", "be brief"}, {"user", "hello"}};
    return r;
}

ErrorCode send_error(Transport& t, std::string* detail = nullptr) {
    try {
        t.send(simple_request());
    } catch (const Error& e) {
        if (detail != nullptr) {
            *detail = e.detail();
        }
        return e.code();
    }
    ADD_FAILURE() << "expected evince::Error";
    return ErrorCode::Io;
}

}  // namespace

TEST(Endpoint, ParsesSchemeHostPortPath) {
    const Endpoint e = Endpoint::parse("https://api.example.com/v1/chat/completions");
    EXPECT_EQ(e.scheme, "https");
    EXPECT_EQ(e.host, "api.example.com");
    EXPECT_EQ(e.port, 443);
    EXPECT_EQ(e.path, "/v1/chat/completions");
    const Endpoint local = Endpoint::parse("http://127.0.0.1:8080");
    EXPECT_EQ(local.port, 8080);
    EXPECT_EQ(local.path, "/");
    EXPECT_THROW(Endpoint::parse("ftp://x/y"), Error);
    EXPECT_THROW(Endpoint::parse("no-scheme"), Error);
}

TEST(Request, JsonShape) {
    const nlohmann::json j = simple_request();
    EXPECT_EQ(j.at("model"), "test-model");
    EXPECT_EQ(j.at("messages").size(), 2u);
    EXPECT_EQ(j.at("messages")[1].at("role"), "user");
    EXPECT_DOUBLE_EQ(j.at("temperature").get<double>(), 0.7);
}

TEST(EnvVar, NameFromProvider) {
    EXPECT_EQ(env_var_name("openai", "API_KEY"), "EVINCE_OPENAI_API_KEY");
    EXPECT_EQ(env_var_name("my-llm", "URL"), "EVINCE_MY_LLM_URL");
}

TEST(Adapters, UnknownProviderIsConfigError) { EXPECT_THROW(make_adapter("nope"), Error); }

TEST(HttpTransport, OpenAiRoundTrip) {
    LocalServer s;
    nlohmann::json seen;
    std::string auth;
    s.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = nlohmann::json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"- Dengue: 100%"}}]})",
                        "application/json");
    });
    ::setenv("EVINCE_OPENAI_API_KEY", "sk-test", 1);
    auto transport = make_http_transport(chat_profile("openai", s.url("/v1/chat/completions")));
    ::unsetenv("EVINCE_OPENAI_API_KEY");
    EXPECT_EQ(transport->send(simple_request()), "- Dengue: 100%");
    EXPECT_EQ(seen.at("model"), "test-model");
    EXPECT_EQ(seen.at("messages")[0].at("role"), "system");
    EXPECT_EQ(auth, "Bearer sk-test");
}

TEST(HttpTransport, AnthropicSplitsSystemPrompt) {
    LocalServer s;
    nlohmann::json seen;
    std::string version;
    s.server().Post("/v1/messages", [&](const httplib::Request& req, httplib::Response& res) {
        seen = nlohmann::json::parse(req.body);
        version = req.get_header_value("anthropic-version");
        res.set_content(R"({"content":[{"type":"text","text":"- Zika: 100%"}]})", "application/json");
    });
    auto transport = make_http_transport(chat_profile("anthropic", s.url("/v1/messages")));
    EXPECT_EQ(transport->send(simple_request()), "- Zika: 100%");
    EXPECT_EQ(seen.at("system"), "be brief");
    EXPECT_EQ(seen.at("messages").size(), 1u);
    EXPECT_TRUE(seen.contains("max_tokens"));
    EXPECT_FALSE(version.empty());
}

TEST(HttpTransport, GeminiSubstitutesModelInPath) {
    LocalServer s;
    nlohmann::json seen;
    s.server().Post("/v1beta/models/test-model:generateContent",
                    [&](const httplib::Request& req, httplib::Response& res) {
                        seen = nlohmann::json::parse(req.body);
                        res.set_content(R"({"candidates":[{"content":{"parts":[{"text":"- Flu: 100%"}]}}]})",
                                        "application/json");
                    });
    auto transport =
        make_http_transport(chat_profile("gemini", s.url("/v1beta/models/{model}:generateContent")));
    EXPECT_EQ(transport->send(simple_request()), "- Flu: 100%");
    EXPECT_TRUE(seen.contains("contents"));
    EXPECT_TRUE(seen.contains("systemInstruction"));
}

TEST(HttpTransport, NonSuccessStatusCarriesCode) {
    LocalServer s;
    s.server().Post("/c", [](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
        res.set_content("overloaded", "text/plain");
    });
    auto transport = make_http_transport(chat_profile("openai", s.url("/c")));
    std::string detail;
    EXPECT_EQ(send_error(*transport, &detail), ErrorCode::BackendHttpError);
    EXPECT_EQ(detail, "503");
}

TEST(HttpTransport, MissingCompletionIsParseFailure) {
    LocalServer s;
    s.server().Post("/c", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"choices":[]})", "application/json");
    });
    auto transport = make_http_transport(chat_profile("openai", s.url("/c")));
    EXPECT_EQ(send_error(*transport), ErrorCode::ParseFailure);
}

TEST(HttpTransport, SlowServerTimesOut) {
    LocalServer s;
    s.server().Post("/c", [](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(2500));
        res.set_content("{}", "application/json");
    });
    AgentProfile p = chat_profile("openai", s.url("/c"));
    p.request_timeout = std::chrono::seconds(1);
    auto transport = make_http_transport(p);
    EXPECT_EQ(send_error(*transport), ErrorCode::BackendTimeout);
}

TEST(HttpTransport, RefusedConnectionReportsStatusZero) {
    std::string url;
    {
        LocalServer s;
        url = s.url("/c");
    }
    auto transport = make_http_transport(chat_profile("openai", url));
    std::string detail;
    const ErrorCode code = send_error(*transport, &detail);
    EXPECT_TRUE(code == ErrorCode::BackendHttpError || code == ErrorCode::BackendTimeout);
    if (code == ErrorCode::BackendHttpError) {
        EXPECT_EQ(detail, "0");
    }
}

TEST(HttpTransport, EndpointFromEnvironment) {
    AgentProfile p = chat_profile("openai", "");
    ::unsetenv("EVINCE_OPENAI_URL");
    EXPECT_THROW(make_http_transport(p), Error);
    ::setenv("EVINCE_OPENAI_URL", "http://127.0.0.1:9/c", 1);
    EXPECT_NO_THROW(make_http_transport(p));
    ::unsetenv("EVINCE_OPENAI_URL");
}

TEST(ChatAgent, QueryParsesCompletion) {
    LocalServer s;
    std::atomic<int> calls{0};
    s.server().Post("/c", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        const auto body = nlohmann::json::parse(req.body);
        EXPECT_EQ(body.at("messages")[0].at("content"), std::string(kSystemPrompt));
        res.set_content(
            R"({"choices":[{"message":{"content":"- Dengue Fever: 60%\n- Chikungunya: 40%"}}]})",
            "application/json");
    });
    auto agent = open_session(chat_profile("openai", s.url("/c")), "case-1");
    const AgentResponse r = agent->query("symptoms: fever");
    EXPECT_EQ(calls.load(), 1);
    EXPECT_DOUBLE_EQ(r.predictions.mass("dengue fever"), 0.6);
    EXPECT_TRUE(r.predictions.is_normalized());
}
