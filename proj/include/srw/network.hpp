#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srw/error.hpp"

namespace srw {

using NodeId = std::string;

/// Probabilities are validated against [0,1] with this slack.
inline constexpr double kProbabilityTolerance = 1e-9;

enum class State { NotImplied = 0, Implied = 1 };

std::string_view to_string(State s);

/// P(implied | parent configuration). Row index is a bitmask over the owning
/// node's parent list: bit i set means parents[i] is implied.
struct CptTable {
  std::vector<double> p_implied;

  std::size_t arity() const;
  bool operator==(const CptTable&) const = default;
};

/// "a=1,b=0" for the given parent order and row mask.
std::string row_key(const std::vector<NodeId>& parents, std::size_t mask);

/// Binary-node Bayesian network. Node order is insertion order; parent lists
/// fix the row layout of each node's table.
struct Network {
  std::vector<NodeId> nodes;
  std::map<NodeId, std::vector<NodeId>> parents;
  std::map<NodeId, CptTable> cpt;

  void add_node(const NodeId& id, std::vector<NodeId> node_parents, CptTable table);
  bool contains(const NodeId& id) const { return cpt.count(id) != 0 || parents.count(id) != 0; }
  const std::vector<NodeId>& parents_of(const NodeId& id) const;
  std::size_t size() const { return nodes.size(); }
};

enum class ViolationKind { Cycle, MissingParent, BadArity, BadProbability, DuplicateNode };

std::string_view to_string(ViolationKind kind);

struct Violation {
  NodeId node;
  ViolationKind kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

ValidationReport validate_network(const Network& net);

/// Finds a directed cycle in the parent relation, if any. The path follows edge
/// direction (parent to child), starts at its smallest id and repeats that
/// node at the end. Parents
/// that are not in `nodes` are ignored.
std::optional<std::vector<NodeId>> find_cycle(
    const std::vector<NodeId>& nodes, const std::map<NodeId, std::vector<NodeId>>& parents);

std::string format_path(const std::vector<NodeId>& path);

/// Likelihood pair for virtual evidence.
struct Likelihood {
  double implied = 1.0;
  double not_implied = 1.0;

  bool operator==(const Likelihood&) const = default;
};

/// Hard and soft findings; a node carries at most one of the two.
class EvidenceSet {
 public:
  void set_hard(const NodeId& node, State state, const std::string& actor = {});
  /// Throws InvalidEvidence for negative, non-finite or (0,0) pairs.
  void set_soft(const NodeId& node, Likelihood lik, const std::string& actor = {});
  /// Returns false if the node had no finding.
  bool retract(const NodeId& node);

  const std::map<NodeId, State>& hard() const { return hard_; }
  const std::map<NodeId, Likelihood>& soft() const { return soft_; }
  const std::map<NodeId, std::string>& provenance() const { return provenance_; }

  std::optional<State> hard_state(const NodeId& node) const;
  bool has_finding(const NodeId& node) const { return hard_.count(node) || soft_.count(node); }
  bool empty() const { return hard_.empty() && soft_.empty(); }

  /// Canonical text form, stable across runs; used for state digests.
  std::string canonical() const;

  bool operator==(const EvidenceSet&) const = default;

 private:
  std::map<NodeId, State> hard_;
  std::map<NodeId, Likelihood> soft_;
  std::map<NodeId, std::string> provenance_;
};

using BeliefMap = std::map<NodeId, double>;

}  // namespace srw
