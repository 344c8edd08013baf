#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "srw/config.hpp"
#include "srw/elicitation.hpp"
#include "srw/fragment.hpp"
#include "srw/network.hpp"

namespace srw {

// Rule conditions.
struct MessageMatches {
  std::string topic;
  std::string contains;  // substring of the body; empty matches any body
};
struct PosteriorAtLeast {
  NodeId node;
  double p = 0.0;
};
struct PosteriorBelow {
  NodeId node;
  double p = 0.0;
};
struct EvidenceAbsent {
  NodeId node;
};
struct EvidencePresent {
  NodeId node;
  State state = State::Implied;
};
using Condition = std::variant<MessageMatches, PosteriorAtLeast, PosteriorBelow, EvidenceAbsent, EvidencePresent>;

// Rule actions.
struct AssertHard {
  NodeId node;
  State state = State::Implied;
};
struct Retract {
  NodeId node;
};
struct DeclareSoft {
  NodeId node;
  Likelihood likelihood;
};
struct EmitMessage {
  std::string topic;
  std::string body;
};
using Action = std::variant<AssertHard, Retract, DeclareSoft, EmitMessage>;

struct AgentRule {
  std::string id;
  std::vector<Condition> when;  // conjunction
  std::vector<Action> then;
  bool fired_once = true;
};

struct Agent {
  std::string name;
  std::vector<AgentRule> rules;
};

/// Throws SchemaViolation or UnknownActionKind.
Agent parse_agent(std::string_view bytes);
Agent load_agent(const std::string& path);
/// Every *.json file in the directory, sorted by file name.
std::vector<Agent> load_agents_dir(const std::string& dir);

enum class EventKind { Message, Assert, Retract, Soft, Propagate, Classify, Conflict };

std::string_view to_string(EventKind kind);

struct Event {
  std::uint64_t seq = 0;
  std::string actor;
  EventKind kind = EventKind::Message;
  nlohmann::json payload;

  bool operator==(const Event&) const = default;
};

using Transcript = std::vector<Event>;

/// One JSON object per line: {"seq","actor","kind","payload"}.
std::string event_to_json_line(const Event& e);
std::string transcript_to_jsonl(const Transcript& t);
Transcript parse_transcript(std::string_view jsonl);

/// Evidence-state digest recorded after each evidence change.
struct DigestEntry {
  std::uint64_t seq = 0;
  std::string digest;
};

std::string evidence_digest(const EvidenceSet& ev);

struct Oscillation {
  std::uint64_t first_seq = 0;   // where the state was first seen
  std::uint64_t repeat_seq = 0;  // where it came back
};

/// Earliest recurrence of a digest with a different state in between.
std::optional<Oscillation> detect_oscillation(const std::vector<DigestEntry>& history);

/// Reapplies the evidence events of a transcript to an empty evidence set.
EvidenceSet replay_evidence(const Transcript& t);

enum class SessionStatus { Running, Paused, Halted };

std::string_view to_string(SessionStatus s);

/// Blackboard session: one network, a set of agents, an evidence set, and the
/// transcript of everything that happened. All mutations go through here.
class Session {
 public:
  /// Throws InvalidNetwork, SchemaViolation (duplicate agent names) or
  /// UnknownNode (rule references a node outside the network).
  Session(Network net, std::vector<Agent> agents, std::vector<PatternRule> rules, SessionConfig config);

  const Network& network() const { return net_; }
  const EvidenceSet& evidence() const { return evidence_; }
  const BeliefMap& beliefs() const { return beliefs_; }
  const Transcript& transcript() const { return transcript_; }
  const SessionConfig& config() const { return config_; }
  const std::vector<DigestEntry>& history() const { return history_; }
  SessionStatus status() const { return status_; }
  int round() const { return round_; }
  bool max_rounds_exceeded() const { return max_rounds_exceeded_; }
  std::uint64_t next_seq() const { return next_seq_; }

  /// Runs agents without a message until nothing changes.
  void settle();

  /// Logs the utterance, translates it and steps every produced message,
  /// then settles. Returns false if the session is not running.
  bool submit_utterance(std::string_view text);

  /// Delivers a message to all agents (name order, rules in file order), then
  /// drains any messages the agents emitted.
  void step_message(Message m);

  // Operator evidence. These resume a paused session and start a fresh
  // oscillation epoch, then let the agents settle. Throws UnknownNode; contradictory evidence throws
  // EvidenceContradiction and leaves the session unchanged.
  void operator_assert(const NodeId& node, State state);
  void operator_soft(const NodeId& node, Likelihood lik);
  void operator_retract(const NodeId& node);

  ImpliedSet implied() const { return implied(config_.threshold); }
  ImpliedSet implied(double threshold) const;

  /// Appends a classification snapshot at the session threshold.
  void snapshot();

 private:
  struct Context {
    const Message* message = nullptr;
  };

  Event& log(std::string actor, EventKind kind, nlohmann::json payload);
  bool conditions_hold(const AgentRule& rule, const Context& ctx) const;
  // Runs one pass over every agent. Returns true if evidence changed or a
  // message was emitted.
  bool evaluate(const Context& ctx);
  bool apply(const std::string& actor, const std::string& rule_id, const Action& action);
  bool change_evidence(const std::string& actor, const std::string& rule_id, EventKind kind, const NodeId& node,
                       const EvidenceSet& next, nlohmann::json payload);
  void propagate(const std::string& actor);
  void record_digest(std::uint64_t seq);
  void drain_inbox();
  void check_node(const NodeId& node) const;
  void operator_change(EventKind kind, const EvidenceSet& next, nlohmann::json payload);
  bool running() const { return status_ == SessionStatus::Running; }

  Network net_;
  std::vector<Agent> agents_;
  std::vector<std::vector<char>> fired_;  // [agent][rule]
  std::vector<PatternRule> rules_;
  SessionConfig config_;

  EvidenceSet evidence_;
  EvidenceSet propagated_evidence_;  // last evidence set that propagated cleanly
  BeliefMap beliefs_;
  std::deque<Message> inbox_;
  Transcript transcript_;
  std::vector<DigestEntry> history_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t next_message_seq_ = 1;
  int round_ = 0;
  bool draining_ = false;
  bool dirty_ = false;  // evidence changed since the last propagation (batch mode)
  bool max_rounds_exceeded_ = false;
  SessionStatus status_ = SessionStatus::Running;
};

enum class SessionOutcome { Completed, Conflict, MaxRoundsExceeded };

struct SessionResult {
  Transcript transcript;
  BeliefMap beliefs;
  ImpliedSet implied;
  SessionOutcome outcome = SessionOutcome::Completed;
};

/// Headless run: settle, then each utterance in turn, then a final
/// classification snapshot. Oscillation halts the run (the transcript then
/// ends with the conflict event).
SessionResult run_session(const Network& net, const std::vector<Agent>& agents,
                          const std::vector<std::string>& utterances, const std::vector<PatternRule>& rules,
                          SessionConfig config);

}  // namespace srw
