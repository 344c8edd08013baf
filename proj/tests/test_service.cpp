#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "srw/service.hpp"
#include "support.hpp"

using namespace srw;
using nlohmann::json;

namespace {

json corpus_session_body() {
  return json{{"fragment_path", "example21.json"}, {"agents_dir", "agents"}, {"rules_path", "rules.json"}};
}

std::string create(SessionService& svc, const json& body = corpus_session_body()) {
  const auto r = svc.create_session(body);
  REQUIRE(r.status == 201);
  return r.body.at("session_id").get<std::string>();
}

std::vector<std::string> implied_ids(const ServiceResponse& r) {
  std::vector<std::string> out;
  for (const auto& row : r.body.at("implied")) out.push_back(row.at("node"));
  return out;
}

// Runs the HTTP server on an ephemeral port for the lifetime of the object.
struct LiveServer {
  SessionService service{SRW_CORPUS_DIR};
  httplib::Server server;
  std::thread thread;
  int port = 0;

  LiveServer() {
    mount_routes(server, service);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
};

}  // namespace

TEST_CASE("creating sessions") {
  SessionService svc(SRW_CORPUS_DIR);
  const auto r = svc.create_session(corpus_session_body());
  CHECK(r.status == 201);
  CHECK(r.body.at("config").at("threshold") == 0.75);
  CHECK(r.body.at("config").at("mode") == "strict");

  auto expert = corpus_session_body();
  expert["config"] = {{"mode", "expert"}};
  CHECK(svc.create_session(expert).body.at("config").at("threshold") == 0.5);

  auto both = corpus_session_body();
  both["manifest_path"] = "manifest.json";
  CHECK(svc.create_session(both).status == 400);
  CHECK(svc.create_session(json{{"fragment_path", "missing.json"}}).status == 400);
  CHECK(svc.create_session(json{{"manifest_path", "cycle_manifest.json"}}).body.at("error") == "CycleIntroduced");

  const auto glued = svc.create_session(json{{"manifest_path", "manifest.json"}});
  REQUIRE(glued.status == 201);
  CHECK(svc.network(glued.body.at("session_id")).body.at("nodes").size() == 10);
}

TEST_CASE("the utterance flow raises time management from 0.48 to 0.80") {
  SessionService svc(SRW_CORPUS_DIR);
  const auto id = create(svc);
  CHECK(svc.beliefs(id).body.at("beliefs").at("time_mgmt").get<double>() == doctest::Approx(0.288));

  auto r = svc.post_utterance(id, {{"text", "We need a distributed simulation."}});
  REQUIRE(r.status == 200);
  CHECK(svc.beliefs(id).body.at("beliefs").at("time_mgmt").get<double>() == doctest::Approx(0.48));
  CHECK(implied_ids(svc.implied(id, std::nullopt)) == std::vector<std::string>{"distributed_sim"});

  r = svc.post_utterance(id, {{"text", "Use PDES."}});
  REQUIRE(r.status == 200);
  CHECK(r.body.at("events").size() > 0);
  const auto b = svc.beliefs(id).body;
  CHECK(b.at("beliefs").at("time_mgmt").get<double>() == doctest::Approx(0.8));
  CHECK(b.at("evidence").at("hard").at("pdes").at("actor") == "requirements");
  CHECK(implied_ids(svc.implied(id, std::nullopt)) ==
        std::vector<std::string>{"distributed_sim", "pdes", "time_mgmt"});
  CHECK(implied_ids(svc.implied(id, 0.5)).size() == 4);
  CHECK(svc.implied(id, 1.5).status == 400);
}

TEST_CASE("operator evidence endpoints") {
  SessionService svc(SRW_CORPUS_DIR);
  const auto id = create(svc);
  CHECK(svc.post_evidence(id, {{"node", "pdes"}, {"kind", "hard"}, {"state", "implied"}}).status == 200);
  CHECK(svc.beliefs(id).body.at("beliefs").at("time_mgmt").get<double>() == doctest::Approx(0.48));
  CHECK(svc.post_evidence(id, {{"node", "time_mgmt_msgs"}, {"kind", "soft"}, {"l_implied", 2.0}, {"l_not", 1.0}})
            .status == 200);
  CHECK(svc.beliefs(id).body.at("evidence").at("soft").contains("time_mgmt_msgs"));
  CHECK(svc.delete_evidence(id, "pdes").status == 200);
  CHECK_FALSE(svc.beliefs(id).body.at("evidence").at("hard").contains("pdes"));

  CHECK(svc.post_evidence(id, {{"node", "ghost"}, {"kind", "hard"}}).status == 404);
  CHECK(svc.post_evidence(id, {{"node", "pdes"}, {"kind", "soft"}, {"l_implied", -1}, {"l_not", 1}}).status == 422);
  CHECK(svc.post_evidence(id, {{"node", "pdes"}, {"kind", "maybe"}}).status == 400);
  CHECK(svc.beliefs("s999999").status == 404);
}

TEST_CASE("contradictory evidence is refused with 422") {
  SessionService svc(SRW_CORPUS_DIR);
  const json frag = json::parse(R"({"srw_version":1,"name":"c","nodes":[
      {"id":"a","cpt":{"kind":"prior","p_implied":1.0}}]})");
  const auto id = create(svc, json{{"fragment", frag}});
  const auto r = svc.post_evidence(id, {{"node", "a"}, {"kind", "hard"}, {"state", "not_implied"}});
  CHECK(r.status == 422);
  CHECK(r.body.at("error") == "EvidenceContradiction");
  CHECK(svc.beliefs(id).body.at("evidence").at("hard").empty());
}

TEST_CASE("oscillating agents pause the session until the operator decides") {
  SessionService svc(SRW_CORPUS_DIR);
  const auto id = create(svc, json{{"fragment_path", "flipflop/network.json"}, {"agents_dir", "flipflop/agents"}});
  CHECK(svc.beliefs(id).body.at("status") == "paused");
  const auto r = svc.post_utterance(id, {{"text", "hello"}});
  CHECK(r.status == 409);
  CHECK(r.body.at("error") == "SessionPaused");
  CHECK(svc.post_evidence(id, {{"node", "x"}, {"kind", "hard"}, {"state", 0}}).status == 200);
  CHECK(svc.beliefs(id).body.at("status") == "running");
  CHECK(svc.post_utterance(id, {{"text", "hello"}}).status == 200);
}

TEST_CASE("event paging") {
  SessionService svc(SRW_CORPUS_DIR);
  const auto id = create(svc);
  svc.post_utterance(id, {{"text", "a distributed simulation"}});
  const auto all = svc.events(id, 0).body;
  const auto next = all.at("next_seq").get<std::uint64_t>();
  CHECK(all.at("events").size() == next - 1);
  CHECK(svc.events(id, next).body.at("events").empty());
  const auto tail = svc.events(id, 3).body.at("events");
  CHECK(tail.front().at("seq") == 3);
}

TEST_CASE("exporting a specification") {
  SessionService svc(SRW_CORPUS_DIR);
  const auto id = create(svc);
  svc.post_utterance(id, {{"text", "a distributed simulation using pdes"}});
  const auto r = svc.export_spec(id, {{"discarded", {"pdes"}}});
  REQUIRE(r.status == 200);
  const auto doc = r.body.at("document").get<std::string>();
  CHECK(doc.find("Time management service") != std::string::npos);
  CHECK(doc.find("Evidence trail") != std::string::npos);
  CHECK(doc.find("Discarded") != std::string::npos);
}

TEST_CASE("HTTP routes") {
  LiveServer live;
  httplib::Client client("127.0.0.1", live.port);

  auto res = client.Post("/sessions", corpus_session_body().dump(), "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 201);
  const auto id = json::parse(res->body).at("session_id").get<std::string>();
  const std::string base = "/sessions/" + id;

  res = client.Post(base + "/utterance", R"({"text":"a distributed simulation"})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);

  res = client.Get(base + "/beliefs");
  REQUIRE(res);
  CHECK(json::parse(res->body).at("beliefs").at("time_mgmt").get<double>() == doctest::Approx(0.48));

  res = client.Post(base + "/evidence", R"({"node":"pdes","kind":"hard","state":"implied"})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);

  res = client.Get(base + "/implied?threshold=0.5");
  REQUIRE(res);
  CHECK(json::parse(res->body).at("implied").size() == 4);
  res = client.Get(base + "/implied?threshold=abc");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = client.Get(base + "/network");
  REQUIRE(res);
  CHECK(json::parse(res->body).at("nodes").size() == 4);

  res = client.Get(base + "/events?from=1");
  REQUIRE(res);
  CHECK(json::parse(res->body).at("events").front().at("seq") == 1);

  res = client.Delete(base + "/evidence/pdes");
  REQUIRE(res);
  CHECK(res->status == 200);

  res = client.Post(base + "/export", "{}", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);

  res = client.Get("/sessions/nope/beliefs");
  REQUIRE(res);
  CHECK(res->status == 404);

  res = client.Post(base + "/evidence", R"({"node":"ghost","kind":"hard"})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 404);

  res = client.Post("/sessions", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
}
