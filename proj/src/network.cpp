#include "srw/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace srw {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EvidenceContradiction: return "EvidenceContradiction";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::InvalidNetwork: return "InvalidNetwork";
    case ErrorKind::InvalidEvidence: return "InvalidEvidence";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::DuplicateNode: return "DuplicateNode";
    case ErrorKind::UnknownParent: return "UnknownParent";
    case ErrorKind::CycleInFragment: return "CycleInFragment";
    case ErrorKind::NoParents: return "NoParents";
    case ErrorKind::WeightParentMismatch: return "WeightParentMismatch";
    case ErrorKind::BadProbability: return "BadProbability";
    case ErrorKind::CycleIntroduced: return "CycleIntroduced";
    case ErrorKind::TableNotGluable: return "TableNotGluable";
    case ErrorKind::PriorConflict: return "PriorConflict";
    case ErrorKind::SpecKindMismatch: return "SpecKindMismatch";
    case ErrorKind::EmptyPattern: return "EmptyPattern";
    case ErrorKind::UnknownActionKind: return "UnknownActionKind";
    case ErrorKind::MissingLabel: return "MissingLabel";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(State s) {
  return s == State::Implied ? "implied" : "not_implied";
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Cycle: return "Cycle";
    case ViolationKind::MissingParent: return "MissingParent";
    case ViolationKind::BadArity: return "BadArity";
    case ViolationKind::BadProbability: return "BadProbability";
    case ViolationKind::DuplicateNode: return "DuplicateNode";
  }
  return "Unknown";
}

std::size_t CptTable::arity() const {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < p_implied.size()) ++n;
  return n;
}

std::string row_key(const std::vector<NodeId>& parents, std::size_t mask) {
  std::string key;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    if (i) key += ',';
    key += parents[i];
    key += (mask >> i) & 1 ? "=1" : "=0";
  }
  return key;
}

void Network::add_node(const NodeId& id, std::vector<NodeId> node_parents, CptTable table) {
  nodes.push_back(id);
  parents[id] = std::move(node_parents);
  cpt[id] = std::move(table);
}

const std::vector<NodeId>& Network::parents_of(const NodeId& id) const {
  static const std::vector<NodeId> none;
  auto it = parents.find(id);
  return it == parents.end() ? none : it->second;
}

std::optional<std::vector<NodeId>> find_cycle(
    const std::vector<NodeId>& nodes, const std::map<NodeId, std::vector<NodeId>>& parents) {
  std::set<NodeId> known(nodes.begin(), nodes.end());
  std::vector<NodeId> order(known.begin(), known.end());
  // 0 = unvisited, 1 = on stack, 2 = done
  std::map<NodeId, int> color;
  std::vector<NodeId> stack;

  // Walks child -> parent edges; a back edge closes a cycle on the stack.
  std::optional<std::vector<NodeId>> found;
  auto visit = [&](auto&& self, const NodeId& node) -> bool {
    color[node] = 1;
    stack.push_back(node);
    auto it = parents.find(node);
    if (it != parents.end()) {
      std::vector<NodeId> ps = it->second;
      std::sort(ps.begin(), ps.end());
      for (const auto& p : ps) {
        if (!known.count(p)) continue;
        int c = color[p];
        if (c == 1) {
          auto start = std::find(stack.begin(), stack.end(), p);
          std::vector<NodeId> cycle(start, stack.end());
          // stack runs child -> parent; reverse to parent -> child
          std::reverse(cycle.begin(), cycle.end());
          std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
          cycle.push_back(cycle.front());
          found = std::move(cycle);
          return true;
        }
        if (c == 0 && self(self, p)) return true;
      }
    }
    stack.pop_back();
    color[node] = 2;
    return false;
  };
  for (const auto& n : order) {
    if (color[n] == 0 && visit(visit, n)) return found;
  }
  return std::nullopt;
}

std::string format_path(const std::vector<NodeId>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += " -> ";
    out += path[i];
  }
  return out;
}

ValidationReport validate_network(const Network& net) {
  ValidationReport report;
  std::set<NodeId> seen;
  for (const auto& id : net.nodes) {
    if (!seen.insert(id).second) {
      report.violations.push_back({id, ViolationKind::DuplicateNode, "node listed twice"});
    }
  }
  for (const auto& id : seen) {
    const auto& ps = net.parents_of(id);
    std::set<NodeId> unique_parents;
    for (const auto& p : ps) {
      if (!seen.count(p)) {
        report.violations.push_back({id, ViolationKind::MissingParent, "parent '" + p + "' is not a node"});
      }
      if (!unique_parents.insert(p).second) {
        report.violations.push_back({id, ViolationKind::BadArity, "parent '" + p + "' listed twice"});
      }
    }
    auto it = net.cpt.find(id);
    if (it == net.cpt.end()) {
      report.violations.push_back({id, ViolationKind::BadArity, "no conditional table"});
      continue;
    }
    const auto& rows = it->second.p_implied;
    if (ps.size() >= 8 * sizeof(std::size_t) || rows.size() != (std::size_t{1} << ps.size())) {
      report.violations.push_back({id, ViolationKind::BadArity,
                                   "table has " + std::to_string(rows.size()) + " rows for " +
                                       std::to_string(ps.size()) + " parents"});
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double p = rows[r];
      if (!std::isfinite(p) || p < -kProbabilityTolerance || p > 1.0 + kProbabilityTolerance) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", p);
        report.violations.push_back({id, ViolationKind::BadProbability,
                                     "row " + std::to_string(r) + " has p_implied " + buf});
      }
    }
  }
  if (auto cycle = find_cycle(net.nodes, net.parents)) {
    report.violations.push_back({cycle->front(), ViolationKind::Cycle, format_path(*cycle)});
  }
  return report;
}

void EvidenceSet::set_hard(const NodeId& node, State state, const std::string& actor) {
  soft_.erase(node);
  hard_[node] = state;
  provenance_[node] = actor;
}

void EvidenceSet::set_soft(const NodeId& node, Likelihood lik, const std::string& actor) {
  if (!std::isfinite(lik.implied) || !std::isfinite(lik.not_implied) || lik.implied < 0 ||
      lik.not_implied < 0) {
    throw Error(ErrorKind::InvalidEvidence, "soft likelihoods for '" + node + "' must be finite and >= 0");
  }
  if (lik.implied == 0 && lik.not_implied == 0) {
    throw Error(ErrorKind::InvalidEvidence, "soft likelihood pair for '" + node + "' is (0,0)");
  }
  hard_.erase(node);
  soft_[node] = lik;
  provenance_[node] = actor;
}

bool EvidenceSet::retract(const NodeId& node) {
  bool had = hard_.erase(node) + soft_.erase(node) > 0;
  provenance_.erase(node);
  return had;
}

std::optional<State> EvidenceSet::hard_state(const NodeId& node) const {
  auto it = hard_.find(node);
  if (it == hard_.end()) return std::nullopt;
  return it->second;
}

std::string EvidenceSet::canonical() const {
  // hard_ and soft_ are disjoint, so merging by key gives one sorted listing
  std::map<NodeId, std::string> entries;
  for (const auto& [n, s] : hard_) entries[n] = s == State::Implied ? "h1" : "h0";
  char buf[96];
  for (const auto& [n, l] : soft_) {
    std::snprintf(buf, sizeof buf, "s%.17g,%.17g", l.implied, l.not_implied);
    entries[n] = buf;
  }
  std::string out;
  for (const auto& [n, v] : entries) {
    out += n;
    out += '=';
    out += v;
    out += ';';
  }
  return out;
}

}  // namespace srw
