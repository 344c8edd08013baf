#include "srw/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "srw/inference.hpp"

namespace srw {

using detail::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

State parse_state(const json& j, std::string_view key, const std::string& path) {
  const auto s = detail::get_string(j, key, path);
  if (s == "implied") return State::Implied;
  if (s == "not_implied") return State::NotImplied;
  detail::schema_error(detail::join_path(path, key), "expected 'implied' or 'not_implied'");
}

Condition parse_condition(const json& j, const std::string& path) {
  detail::expect_object(j, path);
  if (!j.contains("kind")) detail::schema_error(detail::join_path(path, "kind"), "missing required field");
  const auto kind = detail::get_string(j, "kind", path);
  if (kind == "message_matches") {
    detail::check_keys(j, path, {"kind", "topic"}, {"contains"});
    return MessageMatches{detail::get_string(j, "topic", path), detail::get_string_or(j, "contains", path, "")};
  }
  if (kind == "posterior_at_least") {
    detail::check_keys(j, path, {"kind", "node", "p"});
    return PosteriorAtLeast{detail::get_string(j, "node", path), detail::get_probability(j, "p", path)};
  }
  if (kind == "posterior_below") {
    detail::check_keys(j, path, {"kind", "node", "p"});
    return PosteriorBelow{detail::get_string(j, "node", path), detail::get_probability(j, "p", path)};
  }
  if (kind == "evidence_absent") {
    detail::check_keys(j, path, {"kind", "node"});
    return EvidenceAbsent{detail::get_string(j, "node", path)};
  }
  if (kind == "evidence_present") {
    detail::check_keys(j, path, {"kind", "node"}, {"state"});
    State s = j.contains("state") ? parse_state(j, "state", path) : State::Implied;
    return EvidencePresent{detail::get_string(j, "node", path), s};
  }
  detail::schema_error(detail::join_path(path, "kind"), "unknown condition kind '" + kind + "'");
}

Action parse_action(const json& j, const std::string& path) {
  detail::expect_object(j, path);
  if (!j.contains("kind")) detail::schema_error(detail::join_path(path, "kind"), "missing required field");
  const auto kind = detail::get_string(j, "kind", path);
  if (kind == "assert_hard") {
    detail::check_keys(j, path, {"kind", "node"}, {"state"});
    State s = j.contains("state") ? parse_state(j, "state", path) : State::Implied;
    return AssertHard{detail::get_string(j, "node", path), s};
  }
  if (kind == "retract") {
    detail::check_keys(j, path, {"kind", "node"});
    return Retract{detail::get_string(j, "node", path)};
  }
  if (kind == "declare_soft") {
    detail::check_keys(j, path, {"kind", "node", "l_implied", "l_not"});
    Likelihood lik{detail::get_number(j, "l_implied", path), detail::get_number(j, "l_not", path)};
    if (lik.implied < 0 || lik.not_implied < 0 || (lik.implied == 0 && lik.not_implied == 0)) {
      detail::schema_error(path, "likelihoods must be >= 0 and not both zero");
    }
    return DeclareSoft{detail::get_string(j, "node", path), lik};
  }
  if (kind == "emit_message") {
    detail::check_keys(j, path, {"kind", "topic", "body"});
    return EmitMessage{detail::get_string(j, "topic", path), detail::get_string(j, "body", path)};
  }
  throw Error(ErrorKind::UnknownActionKind, detail::join_path(path, "kind") + ": unknown action kind '" + kind + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Transcript beliefs are rounded to 12 decimals so that last-bit differences
// between platforms do not change the bytes.
double transcript_value(double b) { return std::round(b * 1e12) / 1e12; }

json beliefs_json(const BeliefMap& beliefs) {
  json out = json::object();
  for (const auto& [id, b] : beliefs) out[id] = transcript_value(b);
  return out;
}

json ranked_json(const std::vector<RankedBelief>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back({{"node", r.node}, {"belief", transcript_value(r.belief)}});
  return out;
}

}  // namespace

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "strict") return Mode::Strict;
  if (s == "expert") return Mode::Expert;
  return std::nullopt;
}

std::string_view to_string(Mode mode) { return mode == Mode::Expert ? "expert" : "strict"; }

Agent parse_agent(std::string_view bytes) {
  const auto doc = detail::parse_json(bytes, "agent");
  detail::check_keys(doc, "", {"agent", "rules"});
  Agent agent;
  agent.name = detail::get_string(doc, "agent", "");
  if (agent.name.empty()) detail::schema_error("agent", "empty agent name");
  const auto& rules = detail::get_array(doc, "rules", "");
  if (rules.empty()) detail::schema_error("rules", "an agent needs at least one rule");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto path = detail::index_path("rules", i);
    detail::check_keys(rules[i], path, {"id", "when", "then"}, {"fired_once"});
    AgentRule rule;
    rule.id = detail::get_string(rules[i], "id", path);
    if (!ids.insert(rule.id).second) detail::schema_error(detail::join_path(path, "id"), "duplicate rule id '" + rule.id + "'");
    const auto& when = detail::get_array(rules[i], "when", path);
    const auto& then = detail::get_array(rules[i], "then", path);
    if (when.empty()) detail::schema_error(detail::join_path(path, "when"), "at least one condition is required");
    if (then.empty()) detail::schema_error(detail::join_path(path, "then"), "at least one action is required");
    for (std::size_t k = 0; k < when.size(); ++k)
      rule.when.push_back(parse_condition(when[k], detail::index_path(detail::join_path(path, "when"), k)));
    for (std::size_t k = 0; k < then.size(); ++k)
      rule.then.push_back(parse_action(then[k], detail::index_path(detail::join_path(path, "then"), k)));
    rule.fired_once = detail::get_bool_or(rules[i], "fired_once", path, true);
    agent.rules.push_back(std::move(rule));
  }
  return agent;
}

Agent load_agent(const std::string& path) {
  try {
    return parse_agent(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), path + ": " + e.detail());
  }
}

std::vector<Agent> load_agents_dir(const std::string& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (ec) throw Error(ErrorKind::Io, "cannot read agent directory '" + dir + "'");
  std::sort(files.begin(), files.end());
  std::vector<Agent> agents;
  for (const auto& f : files) agents.push_back(load_agent(f.string()));
  return agents;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Message: return "message";
    case EventKind::Assert: return "assert";
    case EventKind::Retract: return "retract";
    case EventKind::Soft: return "soft";
    case EventKind::Propagate: return "propagate";
    case EventKind::Classify: return "classify";
    case EventKind::Conflict: return "conflict";
  }
  return "unknown";
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Running: return "running";
    case SessionStatus::Paused: return "paused";
    case SessionStatus::Halted: return "halted";
  }
  return "unknown";
}

std::string event_to_json_line(const Event& e) {
  nlohmann::ordered_json j;
  j["seq"] = e.seq;
  j["actor"] = e.actor;
  j["kind"] = to_string(e.kind);
  j["payload"] = e.payload;
  return j.dump();
}

std::string transcript_to_jsonl(const Transcript& t) {
  std::string out;
  for (const auto& e : t) {
    out += event_to_json_line(e);
    out += '\n';
  }
  return out;
}

Transcript parse_transcript(std::string_view jsonl) {
  static const std::map<std::string, EventKind, std::less<>> kinds{
      {"message", EventKind::Message}, {"assert", EventKind::Assert},     {"retract", EventKind::Retract},
      {"soft", EventKind::Soft},       {"propagate", EventKind::Propagate}, {"classify", EventKind::Classify},
      {"conflict", EventKind::Conflict}};
  Transcript t;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto j = detail::parse_json(line, "transcript line " + std::to_string(line_no));
    const auto path = "line " + std::to_string(line_no);
    detail::check_keys(j, path, {"seq", "actor", "kind", "payload"});
    Event e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.actor = detail::get_string(j, "actor", path);
    auto it = kinds.find(detail::get_string(j, "kind", path));
    if (it == kinds.end()) detail::schema_error(detail::join_path(path, "kind"), "unknown event kind");
    e.kind = it->second;
    e.payload = j.at("payload");
    t.push_back(std::move(e));
  }
  return t;
}

std::string evidence_digest(const EvidenceSet& ev) {
  // 64-bit FNV-1a over the canonical listing
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : ev.canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::optional<Oscillation> detect_oscillation(const std::vector<DigestEntry>& history) {
  for (std::size_t j = 1; j < history.size(); ++j) {
    bool changed_since = false;
    for (std::size_t i = j; i-- > 0;) {
      if (history[i].digest != history[j].digest) {
        changed_since = true;
      } else if (changed_since) {
        return Oscillation{history[i].seq, history[j].seq};
      } else {
        break;  // repeated state with no change in between
      }
    }
  }
  return std::nullopt;
}

EvidenceSet replay_evidence(const Transcript& t) {
  EvidenceSet ev;
  for (const auto& e : t) {
    if (e.kind != EventKind::Assert && e.kind != EventKind::Retract && e.kind != EventKind::Soft) continue;
    if (e.payload.value("noop", false)) continue;
    const auto node = e.payload.at("node").get<std::string>();
    if (e.kind == EventKind::Assert) {
      ev.set_hard(node, e.payload.at("state").get<std::string>() == "implied" ? State::Implied : State::NotImplied,
                  e.actor);
    } else if (e.kind == EventKind::Retract) {
      ev.retract(node);
    } else {
      ev.set_soft(node, {e.payload.at("l_implied").get<double>(), e.payload.at("l_not").get<double>()}, e.actor);
    }
  }
  return ev;
}

// ---------------------------------------------------------------------------

Session::Session(Network net, std::vector<Agent> agents, std::vector<PatternRule> rules, SessionConfig config)
    : net_(std::move(net)), agents_(std::move(agents)), rules_(std::move(rules)), config_(config) {
  std::stable_sort(agents_.begin(), agents_.end(), [](const Agent& a, const Agent& b) { return a.name < b.name; });
  for (std::size_t i = 1; i < agents_.size(); ++i) {
    if (agents_[i].name == agents_[i - 1].name) {
      throw Error(ErrorKind::SchemaViolation, "duplicate agent name '" + agents_[i].name + "'");
    }
  }
  beliefs_ = posterior_marginals(net_, evidence_);
  for (const auto& agent : agents_) {
    for (const auto& rule : agent.rules) {
      auto ref = [&](const NodeId& node) {
        if (!net_.contains(node)) {
          throw Error(ErrorKind::UnknownNode,
                      "agent '" + agent.name + "' rule '" + rule.id + "' references unknown node '" + node + "'");
        }
      };
      for (const auto& c : rule.when) {
        std::visit(overloaded{[](const MessageMatches&) {}, [&](const auto& x) { ref(x.node); }}, c);
      }
      for (const auto& a : rule.then) {
        std::visit(overloaded{[](const EmitMessage&) {}, [&](const auto& x) { ref(x.node); }}, a);
      }
    }
    fired_.emplace_back(agent.rules.size(), 0);
  }
  const auto& first = log("session", EventKind::Propagate,
                          {{"beliefs", beliefs_json(beliefs_)}, {"digest", evidence_digest(evidence_)}});
  history_.push_back({first.seq, evidence_digest(evidence_)});
}

Event& Session::log(std::string actor, EventKind kind, json payload) {
  transcript_.push_back(Event{next_seq_++, std::move(actor), kind, std::move(payload)});
  return transcript_.back();
}

void Session::check_node(const NodeId& node) const {
  if (!net_.contains(node)) throw Error(ErrorKind::UnknownNode, "unknown node '" + node + "'");
}

bool Session::conditions_hold(const AgentRule& rule, const Context& ctx) const {
  auto belief = [&](const NodeId& n) { return beliefs_.at(n); };
  for (const auto& c : rule.when) {
    bool ok = std::visit(
        overloaded{
            [&](const MessageMatches& m) {
              return ctx.message && ctx.message->topic == m.topic &&
                     ctx.message->body.find(m.contains) != std::string::npos;
            },
            [&](const PosteriorAtLeast& p) { return belief(p.node) >= p.p; },
            [&](const PosteriorBelow& p) { return belief(p.node) < p.p; },
            [&](const EvidenceAbsent& e) { return !evidence_.has_finding(e.node); },
            [&](const EvidencePresent& e) {
              auto s = evidence_.hard_state(e.node);
              return s && *s == e.state;
            },
        },
        c);
    if (!ok) return false;
  }
  return true;
}

bool Session::evaluate(const Context& ctx) {
  bool progressed = false;
  for (std::size_t a = 0; a < agents_.size(); ++a) {
    const auto& agent = agents_[a];
    for (std::size_t r = 0; r < agent.rules.size(); ++r) {
      if (!running()) return progressed;
      const auto& rule = agent.rules[r];
      if (rule.fired_once && fired_[a][r]) continue;
      if (!conditions_hold(rule, ctx)) continue;
      fired_[a][r] = 1;
      for (const auto& action : rule.then) {
        progressed |= apply(agent.name, rule.id, action);
        if (!running()) return progressed;
      }
    }
  }
  return progressed;
}

bool Session::apply(const std::string& actor, const std::string& rule_id, const Action& action) {
  return std::visit(
      overloaded{
          [&](const AssertHard& x) {
            json payload{{"node", x.node}, {"state", to_string(x.state)}, {"rule", rule_id}};
            if (evidence_.hard_state(x.node) == x.state) {
              payload["noop"] = true;
              log(actor, EventKind::Assert, std::move(payload));
              return false;
            }
            EvidenceSet next = evidence_;
            next.set_hard(x.node, x.state, actor);
            return change_evidence(actor, rule_id, EventKind::Assert, x.node, next, std::move(payload));
          },
          [&](const Retract& x) {
            json payload{{"node", x.node}, {"rule", rule_id}};
            if (!evidence_.has_finding(x.node)) {
              payload["noop"] = true;
              log(actor, EventKind::Retract, std::move(payload));
              return false;
            }
            EvidenceSet next = evidence_;
            next.retract(x.node);
            return change_evidence(actor, rule_id, EventKind::Retract, x.node, next, std::move(payload));
          },
          [&](const DeclareSoft& x) {
            json payload{{"node", x.node},
                         {"l_implied", x.likelihood.implied},
                         {"l_not", x.likelihood.not_implied},
                         {"rule", rule_id}};
            auto it = evidence_.soft().find(x.node);
            if (it != evidence_.soft().end() && it->second == x.likelihood) {
              payload["noop"] = true;
              log(actor, EventKind::Soft, std::move(payload));
              return false;
            }
            EvidenceSet next = evidence_;
            next.set_soft(x.node, x.likelihood, actor);
            return change_evidence(actor, rule_id, EventKind::Soft, x.node, next, std::move(payload));
          },
          [&](const EmitMessage& x) {
            inbox_.push_back(Message{x.topic, x.body, actor, 0});
            return true;
          },
      },
      action);
}

bool Session::change_evidence(const std::string& actor, const std::string& rule_id, EventKind kind,
                              const NodeId& node, const EvidenceSet& next, json payload) {
  if (!config_.batch_propagate) {
    BeliefMap updated;
    try {
      updated = posterior_marginals(net_, next);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EvidenceContradiction) throw;
      log(actor, EventKind::Conflict,
          {{"reason", "evidence_contradiction"}, {"node", node}, {"action", to_string(kind)}, {"rule", rule_id},
           {"detail", e.detail()}});
      return false;
    }
    payload["noop"] = false;
    evidence_ = next;
    beliefs_ = std::move(updated);
    propagated_evidence_ = evidence_;
    const auto seq = log(actor, kind, std::move(payload)).seq;
    log("session", EventKind::Propagate, {{"beliefs", beliefs_json(beliefs_)}, {"digest", evidence_digest(evidence_)}});
    record_digest(seq);
    return true;
  }
  payload["noop"] = false;
  evidence_ = next;
  dirty_ = true;
  const auto seq = log(actor, kind, std::move(payload)).seq;
  record_digest(seq);
  return true;
}

void Session::propagate(const std::string& actor) {
  if (!dirty_) return;
  dirty_ = false;
  try {
    beliefs_ = posterior_marginals(net_, evidence_);
    propagated_evidence_ = evidence_;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EvidenceContradiction) throw;
    log(actor, EventKind::Conflict, {{"reason", "evidence_contradiction"}, {"detail", e.detail()}});
    // undo the batch with compensating events so the transcript replays exactly
    const EvidenceSet target = propagated_evidence_;
    std::set<NodeId> touched;
    for (const auto& [n, s] : evidence_.hard()) touched.insert(n);
    for (const auto& [n, l] : evidence_.soft()) touched.insert(n);
    for (const auto& [n, s] : target.hard()) touched.insert(n);
    for (const auto& [n, l] : target.soft()) touched.insert(n);
    for (const auto& n : touched) {
      auto want_hard = target.hard_state(n);
      auto have_hard = evidence_.hard_state(n);
      auto want_soft = target.soft().find(n);
      auto have_soft = evidence_.soft().find(n);
      const bool same = want_hard == have_hard &&
                        (want_soft == target.soft().end()) == (have_soft == evidence_.soft().end()) &&
                        (want_soft == target.soft().end() || want_soft->second == have_soft->second);
      if (same) continue;
      if (want_hard) {
        log(actor, EventKind::Assert, {{"node", n}, {"state", to_string(*want_hard)}, {"rule", "revert"}, {"noop", false}});
      } else if (want_soft != target.soft().end()) {
        log(actor, EventKind::Soft,
            {{"node", n}, {"l_implied", want_soft->second.implied}, {"l_not", want_soft->second.not_implied},
             {"rule", "revert"}, {"noop", false}});
      } else {
        log(actor, EventKind::Retract, {{"node", n}, {"rule", "revert"}, {"noop", false}});
      }
    }
    evidence_ = target;
    return;
  }
  log(actor, EventKind::Propagate, {{"beliefs", beliefs_json(beliefs_)}, {"digest", evidence_digest(evidence_)}});
}

void Session::record_digest(std::uint64_t seq) {
  history_.push_back({seq, evidence_digest(evidence_)});
  if (auto osc = detect_oscillation(history_)) {
    log("session", EventKind::Conflict,
        {{"reason", "oscillation"},
         {"first_seq", osc->first_seq},
         {"repeat_seq", osc->repeat_seq},
         {"digest", history_.back().digest},
         {"resolution", config_.on_conflict == OnConflict::Halt ? "halted" : "paused for operator"}});
    status_ = config_.on_conflict == OnConflict::Halt ? SessionStatus::Halted : SessionStatus::Paused;
  }
}

void Session::step_message(Message m) {
  if (!running()) return;
  if (m.seq == 0) {
    m.seq = next_message_seq_++;
  } else {
    if (m.seq < next_message_seq_) {
      throw Error(ErrorKind::SchemaViolation, "message seq " + std::to_string(m.seq) + " already used");
    }
    next_message_seq_ = m.seq + 1;
  }
  log(m.source, EventKind::Message, {{"topic", m.topic}, {"body", m.body}, {"msg_seq", m.seq}});
  Context ctx{&m};
  evaluate(ctx);
  propagate("session");
  drain_inbox();
}

void Session::drain_inbox() {
  if (draining_) return;  // the outer loop picks up messages emitted while stepping
  draining_ = true;
  // each wave of pending messages counts as one round
  int waves = 0;
  while (running() && !inbox_.empty()) {
    if (waves == config_.max_rounds) {
      max_rounds_exceeded_ = true;
      log("session", EventKind::Conflict,
          {{"reason", "max_rounds_exceeded"}, {"max_rounds", config_.max_rounds}, {"dropped_messages", inbox_.size()}});
      inbox_.clear();
      break;
    }
    ++waves;
    std::deque<Message> wave;
    wave.swap(inbox_);
    for (auto& m : wave) {
      if (!running()) break;
      step_message(std::move(m));
    }
  }
  draining_ = false;
}

void Session::settle() {
  int rounds = 0;
  while (running()) {
    if (rounds == config_.max_rounds) {
      max_rounds_exceeded_ = true;
      log("session", EventKind::Conflict, {{"reason", "max_rounds_exceeded"}, {"max_rounds", config_.max_rounds}});
      break;
    }
    ++rounds;
    ++round_;
    const bool progressed = evaluate(Context{});
    propagate("session");
    drain_inbox();
    if (!progressed) break;
  }
}

bool Session::submit_utterance(std::string_view text) {
  if (!running()) return false;
  const auto utterance_seq = next_message_seq_++;
  log("user", EventKind::Message, {{"topic", "utterance"}, {"body", std::string(text)}, {"msg_seq", utterance_seq}});
  auto translation = translate(text, rules_);
  if (translation.untranslated()) {
    log("translator", EventKind::Message,
        {{"topic", "untranslated"}, {"body", std::string(text)}, {"diagnostic", translation.diagnostics.front()}});
  }
  for (auto& m : translation.messages) inbox_.push_back(std::move(m));
  drain_inbox();
  settle();
  return true;
}

void Session::operator_change(EventKind kind, const EvidenceSet& next, json payload) {
  payload["rule"] = "operator";
  const bool changed = !(next == evidence_);
  if (!changed) {
    payload["noop"] = true;
    log("operator", kind, std::move(payload));
  } else {
    BeliefMap updated = posterior_marginals(net_, next);  // throws EvidenceContradiction, nothing changed yet
    payload["noop"] = false;
    evidence_ = next;
    beliefs_ = std::move(updated);
    propagated_evidence_ = evidence_;
    dirty_ = false;
    log("operator", kind, std::move(payload));
    log("session", EventKind::Propagate, {{"beliefs", beliefs_json(beliefs_)}, {"digest", evidence_digest(evidence_)}});
  }
  // the operator's decision closes the current oscillation epoch
  history_.assign(1, DigestEntry{transcript_.back().seq, evidence_digest(evidence_)});
  if (status_ == SessionStatus::Paused) status_ = SessionStatus::Running;
  if (changed && running()) settle();
}

void Session::operator_assert(const NodeId& node, State state) {
  check_node(node);
  EvidenceSet next = evidence_;
  next.set_hard(node, state, "operator");
  operator_change(EventKind::Assert, next, {{"node", node}, {"state", to_string(state)}});
}

void Session::operator_soft(const NodeId& node, Likelihood lik) {
  check_node(node);
  EvidenceSet next = evidence_;
  next.set_soft(node, lik, "operator");
  operator_change(EventKind::Soft, next, {{"node", node}, {"l_implied", lik.implied}, {"l_not", lik.not_implied}});
}

void Session::operator_retract(const NodeId& node) {
  check_node(node);
  EvidenceSet next = evidence_;
  next.retract(node);
  operator_change(EventKind::Retract, next, {{"node", node}});
}

ImpliedSet Session::implied(double threshold) const { return classify(beliefs_, threshold, config_.borderline_band); }

void Session::snapshot() {
  const auto set = implied();
  log("session", EventKind::Classify,
      {{"threshold", set.threshold},
       {"mode", to_string(config_.mode)},
       {"implied", ranked_json(set.implied)},
       {"borderline", ranked_json(set.borderline)}});
}

SessionResult run_session(const Network& net, const std::vector<Agent>& agents,
                          const std::vector<std::string>& utterances, const std::vector<PatternRule>& rules,
                          SessionConfig config) {
  Session s(net, agents, rules, config);
  s.settle();
  for (const auto& u : utterances) {
    if (!s.submit_utterance(u)) break;
  }
  SessionResult result;
  if (s.status() == SessionStatus::Running) s.snapshot();
  result.outcome = s.status() != SessionStatus::Running ? SessionOutcome::Conflict
                   : s.max_rounds_exceeded()           ? SessionOutcome::MaxRoundsExceeded
                                                       : SessionOutcome::Completed;
  result.transcript = s.transcript();
  result.beliefs = s.beliefs();
  result.implied = s.implied();
  return result;
}

}  // namespace srw
