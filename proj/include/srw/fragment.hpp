#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "srw/network.hpp"

namespace srw {

/// Current fragment file format version.
inline constexpr int kFragmentFormatVersion = 1;

struct PriorSpec {
  double p_implied = 0.0;
};

/// Explicit rows keyed by the canonical (lexicographic) parent order.
struct TableSpec {
  CptTable table;
};

/// Row value interpolates from p_none (no parent implied) to p_all (every
/// parent implied) by the fraction of implied parents.
struct LinearAdditiveSpec {
  double p_none = 0.0;
  double p_all = 0.0;
};

struct NoisyOrSpec {
  double leak = 0.0;
  std::map<NodeId, double> weights;
};

using CptSpec = std::variant<PriorSpec, TableSpec, LinearAdditiveSpec, NoisyOrSpec>;

std::string_view spec_kind(const CptSpec& spec);

struct RequirementNode {
  NodeId id;
  std::string title;
  std::string description;
  std::vector<NodeId> parents;
  CptSpec cpt_spec;
};

struct Fragment {
  std::string name;
  int version = kFragmentFormatVersion;
  std::vector<RequirementNode> nodes;

  const RequirementNode* find(const NodeId& id) const;
};

/// Parent list sorted lexicographically; fixes table row layout.
std::vector<NodeId> canonical_parents(std::vector<NodeId> parents);

/// Throws NoParents for an empty parent list, BadProbability for bounds.
CptTable linear_additive_cpt(double p_none, double p_all, const std::vector<NodeId>& parents);

/// Throws WeightParentMismatch unless weights are keyed exactly by parents.
CptTable noisy_or_cpt(double leak, const std::map<NodeId, double>& weights,
                      const std::vector<NodeId>& parents);

/// Checks the fragment invariants: unique ids, internal parents, acyclic,
/// spec/parent agreement, probability bounds. Throws the matching ErrorKind.
void validate_fragment(const Fragment& frag);

/// Non-fatal authoring issues, e.g. an inhibitory linear-additive node.
std::vector<std::string> fragment_warnings(const Fragment& frag);

/// Parses and validates the JSON fragment format. Errors carry a field path
/// (and a line for syntax errors).
Fragment parse_fragment(std::string_view bytes);
Fragment load_fragment(const std::string& path);

std::string serialize_fragment(const Fragment& frag);

/// Expands every spec into a table over the canonical parent order.
Network compile(const Fragment& frag);

/// Same node ids, same parent sets, and compiled tables within `tol`.
bool semantically_equal(const Fragment& a, const Fragment& b, double tol = 1e-12);

inline constexpr double kDefaultBorderlineBand = 0.05;

struct RankedBelief {
  NodeId node;
  double belief = 0.0;

  bool operator==(const RankedBelief&) const = default;
};

struct ImpliedSet {
  double threshold = 0.0;
  double band = kDefaultBorderlineBand;
  std::vector<RankedBelief> implied;     // belief >= threshold
  std::vector<RankedBelief> borderline;  // threshold - band <= belief < threshold

  bool contains(const NodeId& id) const;
  std::vector<NodeId> ids() const;
};

/// Descending belief, then NodeId.
std::vector<RankedBelief> rank_beliefs(const BeliefMap& beliefs);

ImpliedSet classify(const BeliefMap& beliefs, double threshold, double band = kDefaultBorderlineBand);

}  // namespace srw
