#include "srw/service.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <set>

#include <httplib.h>

#include "json_util.hpp"
#include "srw/config.hpp"
#include "srw/elicitation.hpp"
#include "srw/glue.hpp"

namespace srw {

using detail::json;

namespace {

ServiceResponse error_response(int status, std::string_view kind, const std::string& detail) {
  return {status, json{{"error", kind}, {"detail", detail}}};
}

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownNode: return 404;
    case ErrorKind::EvidenceContradiction: return 422;
    case ErrorKind::InvalidEvidence: return 422;
    default: return 400;
  }
}

ServiceResponse from_error(const Error& e) { return error_response(status_for(e.kind()), to_string(e.kind()), e.detail()); }

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

json ranked(const std::vector<RankedBelief>& rows, const Fragment& frag) {
  json out = json::array();
  for (const auto& r : rows) {
    const auto* n = frag.find(r.node);
    out.push_back({{"node", r.node}, {"belief", r.belief}, {"title", n ? n->title : ""}});
  }
  return out;
}

json event_json(const Event& e) {
  return json{{"seq", e.seq}, {"actor", e.actor}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

json page_since(const Session& s, std::uint64_t from) {
  json events = json::array();
  for (const auto& e : s.transcript())
    if (e.seq >= from) events.push_back(event_json(e));
  return json{{"events", events}, {"next_seq", s.next_seq()}};
}

}  // namespace

SessionService::SessionService(std::string base_dir) : base_dir_(std::move(base_dir)) {}

std::string SessionService::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_relative()) p = std::filesystem::path(base_dir_) / p;
  return p.lexically_normal().string();
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) {
  std::shared_lock lock(registry_mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

ServiceResponse SessionService::create_session(const json& body) {
  try {
    detail::check_keys(body, "", {},
                       {"fragment", "fragment_path", "manifest", "manifest_path", "agents", "agents_dir", "rules",
                        "rules_path", "config"});
    const int sources = static_cast<int>(body.contains("fragment")) + static_cast<int>(body.contains("fragment_path")) +
                        static_cast<int>(body.contains("manifest")) + static_cast<int>(body.contains("manifest_path"));
    if (sources != 1) {
      detail::schema_error("", "exactly one of fragment, fragment_path, manifest, manifest_path is required");
    }
    Fragment fragment;
    if (body.contains("fragment")) {
      fragment = parse_fragment(body.at("fragment").dump());
    } else if (body.contains("fragment_path")) {
      fragment = load_fragment(resolve(detail::get_string(body, "fragment_path", "")));
    } else if (body.contains("manifest")) {
      fragment = glue_manifest(parse_glue_manifest(body.at("manifest").dump(), base_dir_)).first;
    } else {
      fragment = glue_manifest(load_glue_manifest(resolve(detail::get_string(body, "manifest_path", "")))).first;
    }

    std::vector<Agent> agents;
    if (body.contains("agents")) {
      const auto& list = detail::get_array(body, "agents", "");
      for (const auto& a : list) agents.push_back(parse_agent(a.dump()));
    }
    if (body.contains("agents_dir")) {
      auto more = load_agents_dir(resolve(detail::get_string(body, "agents_dir", "")));
      agents.insert(agents.end(), more.begin(), more.end());
    }
    std::vector<PatternRule> rules;
    if (body.contains("rules")) rules = parse_rulebook(body.at("rules").dump());
    if (body.contains("rules_path")) rules = load_rulebook(resolve(detail::get_string(body, "rules_path", "")));

    SessionConfig config;
    config.on_conflict = OnConflict::Pause;
    std::optional<double> threshold;
    if (body.contains("config")) {
      const auto& c = body.at("config");
      detail::check_keys(c, "config", {}, {"threshold", "mode", "batch_propagate", "max_rounds", "borderline_band"});
      if (c.contains("mode")) {
        auto mode = parse_mode(detail::get_string(c, "mode", "config"));
        if (!mode) detail::schema_error("config.mode", "expected 'strict' or 'expert'");
        config.mode = *mode;
      }
      if (c.contains("threshold")) threshold = detail::get_probability(c, "threshold", "config");
      if (c.contains("borderline_band")) config.borderline_band = detail::get_probability(c, "borderline_band", "config");
      config.batch_propagate = detail::get_bool_or(c, "batch_propagate", "config", false);
      if (c.contains("max_rounds")) {
        if (!c.at("max_rounds").is_number_integer() || c.at("max_rounds").get<int>() < 1) {
          detail::schema_error("config.max_rounds", "expected a positive integer");
        }
        config.max_rounds = c.at("max_rounds").get<int>();
      }
    }
    config.threshold = resolve_threshold(config.mode, threshold);

    auto entry = std::make_shared<Entry>();
    entry->session = std::make_unique<Session>(compile(fragment), std::move(agents), std::move(rules), config);
    entry->session->settle();
    entry->fragment = std::move(fragment);
    entry->created_at = utc_now();
    char id[32];
    std::snprintf(id, sizeof id, "s%06llu", static_cast<unsigned long long>(++counter_));
    entry->id = id;
    {
      std::unique_lock lock(registry_mu_);
      sessions_[entry->id] = entry;
    }
    return {201, json{{"session_id", entry->id},
                      {"created_at", entry->created_at},
                      {"config", {{"threshold", config.threshold}, {"mode", to_string(config.mode)}}}}};
  } catch (const Error& e) {
    return from_error(e);
  }
}

template <class F>
ServiceResponse SessionService::locked(const std::string& id, F&& fn) {
  auto entry = find(id);
  if (!entry) return error_response(404, "UnknownSession", "no session '" + id + "'");
  std::lock_guard guard(entry->mu);
  try {
    return fn(*entry, *entry->session);
  } catch (const Error& e) {
    return from_error(e);
  }
}

ServiceResponse SessionService::network(const std::string& id) {
  return locked(id, [&](Entry& entry, Session& session) -> ServiceResponse {
    json nodes = json::array();
    for (const auto& n : entry.fragment.nodes) {
      nodes.push_back({{"id", n.id},
                       {"title", n.title},
                       {"description", n.description},
                       {"parents", session.network().parents_of(n.id)},
                       {"cpt_kind", spec_kind(n.cpt_spec)}});
    }
    return {200, json{{"name", entry.fragment.name}, {"nodes", nodes}}};
  });
}

ServiceResponse SessionService::beliefs(const std::string& id) {
  return locked(id, [&](Entry& entry, Session& session) -> ServiceResponse {
    json hard = json::object();
    json soft = json::object();
    const auto& ev = session.evidence();
    for (const auto& [n, s] : ev.hard()) hard[n] = {{"state", to_string(s)}, {"actor", ev.provenance().at(n)}};
    for (const auto& [n, l] : ev.soft())
      soft[n] = {{"l_implied", l.implied}, {"l_not", l.not_implied}, {"actor", ev.provenance().at(n)}};
    json beliefs = json::object();
    for (const auto& [n, b] : session.beliefs()) beliefs[n] = b;
    return {200, json{{"beliefs", beliefs},
                      {"ranked", ranked(rank_beliefs(session.beliefs()), entry.fragment)},
                      {"evidence", {{"hard", hard}, {"soft", soft}}},
                      {"status", to_string(session.status())},
                      {"next_seq", session.next_seq()}}};
  });
}

ServiceResponse SessionService::post_utterance(const std::string& id, const json& body) {
  return locked(id, [&](Entry&, Session& session) -> ServiceResponse {
    detail::check_keys(body, "", {"text"});
    const auto text = detail::get_string(body, "text", "");
    if (session.status() == SessionStatus::Paused) {
      return error_response(409, "SessionPaused", "agents are in conflict; resolve it with an evidence call first");
    }
    if (session.status() == SessionStatus::Halted) {
      return error_response(409, "SessionHalted", "session halted");
    }
    const auto from = session.next_seq();
    session.submit_utterance(text);
    return {200, page_since(session, from)};
  });
}

ServiceResponse SessionService::post_evidence(const std::string& id, const json& body) {
  return locked(id, [&](Entry&, Session& session) -> ServiceResponse {
    detail::check_keys(body, "", {"node", "kind"}, {"state", "l_implied", "l_not"});
    const auto node = detail::get_string(body, "node", "");
    const auto kind = detail::get_string(body, "kind", "");
    const auto from = session.next_seq();
    if (kind == "hard") {
      State state = State::Implied;
      if (body.contains("state")) {
        const auto& s = body.at("state");
        if (s == "implied" || s == 1) {
          state = State::Implied;
        } else if (s == "not_implied" || s == 0) {
          state = State::NotImplied;
        } else {
          detail::schema_error("state", "expected 'implied', 'not_implied', 1 or 0");
        }
      }
      session.operator_assert(node, state);
    } else if (kind == "soft") {
      session.operator_soft(node, {detail::get_number(body, "l_implied", ""), detail::get_number(body, "l_not", "")});
    } else {
      detail::schema_error("kind", "expected 'hard' or 'soft'");
    }
    return {200, page_since(session, from)};
  });
}

ServiceResponse SessionService::delete_evidence(const std::string& id, const std::string& node) {
  return locked(id, [&](Entry&, Session& session) -> ServiceResponse {
    const auto from = session.next_seq();
    session.operator_retract(node);
    return {200, page_since(session, from)};
  });
}

ServiceResponse SessionService::implied(const std::string& id, std::optional<double> threshold) {
  return locked(id, [&](Entry& entry, Session& session) -> ServiceResponse {
    const double t = threshold.value_or(session.config().threshold);
    if (!(t >= 0.0 && t <= 1.0)) return error_response(400, "SchemaViolation", "threshold must be in [0,1]");
    const auto set = session.implied(t);
    return {200, json{{"threshold", set.threshold},
                      {"band", set.band},
                      {"implied", ranked(set.implied, entry.fragment)},
                      {"borderline", ranked(set.borderline, entry.fragment)}}};
  });
}

ServiceResponse SessionService::events(const std::string& id, std::uint64_t from) {
  return locked(id, [&](Entry&, Session& session) -> ServiceResponse {
    return {200, page_since(session, from)};
  });
}

ServiceResponse SessionService::export_spec(const std::string& id, const json& body) {
  return locked(id, [&](Entry& entry, Session& session) -> ServiceResponse {
    json b = body.is_null() ? json::object() : body;
    detail::check_keys(b, "", {}, {"threshold", "discarded"});
    double t = b.contains("threshold") ? detail::get_probability(b, "threshold", "") : session.config().threshold;
    std::set<NodeId> discarded;
    if (b.contains("discarded")) {
      for (const auto& d : detail::get_array(b, "discarded", "")) {
        if (!d.is_string()) detail::schema_error("discarded", "expected node ids");
        discarded.insert(d.get<std::string>());
      }
    }
    return {200, json{{"document", render_specification(entry.id, entry.fragment, session, t, discarded)}}};
  });
}

std::string render_specification(const std::string& session_id, const Fragment& fragment, const Session& session,
                                 double threshold, const std::set<NodeId>& discarded) {
  const auto set = session.implied(threshold);
  std::string doc;
  doc += "SYSTEM REQUIREMENTS SPECIFICATION\n";
  doc += "Session: " + session_id + "\n";
  doc += "Network: " + fragment.name + " (" + std::to_string(fragment.nodes.size()) + " requirements)\n";
  doc += "Threshold: " + fixed4(threshold) + " (" + std::string(to_string(session.config().mode)) + " mode)\n\n";

  doc += "1. Implied system requirements\n";
  int n = 0;
  for (const auto& r : set.implied) {
    if (discarded.count(r.node)) continue;
    const auto* node = fragment.find(r.node);
    doc += "  1." + std::to_string(++n) + " " + r.node;
    if (node && !node->title.empty()) doc += " - " + node->title;
    doc += " [belief " + fixed4(r.belief) + "]\n";
    if (node && !node->description.empty()) doc += "      " + node->description + "\n";
  }
  if (n == 0) doc += "  (none)\n";
  if (!discarded.empty()) {
    doc += "  Discarded by analyst:";
    for (const auto& d : discarded) doc += " " + d;
    doc += "\n";
  }

  doc += "\n2. Evidence trail\n";
  int trail = 0;
  for (const auto& e : session.transcript()) {
    if (e.kind != EventKind::Assert && e.kind != EventKind::Retract && e.kind != EventKind::Soft) continue;
    if (e.payload.value("noop", false)) continue;
    const auto node = e.payload.at("node").get<std::string>();
    std::string line = "  [" + std::to_string(e.seq) + "] " + e.actor + " ";
    if (e.kind == EventKind::Assert) {
      line += "asserted " + node + " " + e.payload.at("state").get<std::string>();
    } else if (e.kind == EventKind::Retract) {
      line += "retracted " + node;
    } else {
      line += "declared soft evidence on " + node + " (" + fixed4(e.payload.at("l_implied").get<double>()) + ", " +
              fixed4(e.payload.at("l_not").get<double>()) + ")";
    }
    doc += line + "\n";
    ++trail;
  }
  if (trail == 0) doc += "  (none)\n";

  doc += "\nAppendix A. Borderline requirements (within " + fixed4(set.band) + " below threshold)\n";
  for (const auto& r : set.borderline) {
    const auto* node = fragment.find(r.node);
    doc += "  " + r.node;
    if (node && !node->title.empty()) doc += " - " + node->title;
    doc += " [belief " + fixed4(r.belief) + "]\n";
  }
  if (set.borderline.empty()) doc += "  (none)\n";
  return doc;
}

void mount_routes(httplib::Server& server, SessionService& service) {
  auto reply = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request& req, httplib::Response& res, json& out) {
    if (req.body.empty()) {
      out = json::object();
      return true;
    }
    try {
      out = json::parse(req.body);
      return true;
    } catch (const json::parse_error& e) {
      res.status = 400;
      res.set_content(json{{"error", "SchemaViolation"}, {"detail", std::string("malformed JSON: ") + e.what()}}.dump(),
                      "application/json");
      return false;
    }
  };

  server.Post("/sessions", [&, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
    json body;
    if (parse_body(req, res, body)) reply(res, service.create_session(body));
  });
  server.Get(R"(/sessions/([^/]+)/network)", [&, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.network(req.matches[1]));
  });
  server.Get(R"(/sessions/([^/]+)/beliefs)", [&, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.beliefs(req.matches[1]));
  });
  server.Post(R"(/sessions/([^/]+)/utterance)",
              [&, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
                json body;
                if (parse_body(req, res, body)) reply(res, service.post_utterance(req.matches[1], body));
              });
  server.Post(R"(/sessions/([^/]+)/evidence)",
              [&, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
                json body;
                if (parse_body(req, res, body)) reply(res, service.post_evidence(req.matches[1], body));
              });
  server.Delete(R"(/sessions/([^/]+)/evidence/([^/]+))",
                [&, reply](const httplib::Request& req, httplib::Response& res) {
                  reply(res, service.delete_evidence(req.matches[1], req.matches[2]));
                });
  server.Get(R"(/sessions/([^/]+)/implied)", [&, reply](const httplib::Request& req, httplib::Response& res) {
    std::optional<double> threshold;
    if (req.has_param("threshold")) {
      try {
        std::size_t used = 0;
        const auto raw = req.get_param_value("threshold");
        threshold = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        reply(res, {400, json{{"error", "SchemaViolation"}, {"detail", "threshold must be a number"}}});
        return;
      }
    }
    reply(res, service.implied(req.matches[1], threshold));
  });
  server.Get(R"(/sessions/([^/]+)/events)", [&, reply](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t from = 0;
    if (req.has_param("from")) {
      try {
        from = std::stoull(req.get_param_value("from"));
      } catch (const std::exception&) {
        reply(res, {400, json{{"error", "SchemaViolation"}, {"detail", "from must be a non-negative integer"}}});
        return;
      }
    }
    reply(res, service.events(req.matches[1], from));
  });
  server.Post(R"(/sessions/([^/]+)/export)",
              [&, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
                json body;
                if (parse_body(req, res, body)) reply(res, service.export_spec(req.matches[1], body));
              });
}

bool serve(const std::string& host, int port, const std::string& base_dir) {
  SessionService service(base_dir);
  httplib::Server server;
  mount_routes(server, service);
  return server.listen(host, port);
}

}  // namespace srw
