#pragma once

#include <vector>

#include "srw/network.hpp"

namespace srw {

/// Largest network enumerate_marginals will accept.
inline constexpr std::size_t kEnumerationLimit = 24;

/// Exact posterior P(node = implied | evidence) for every node, by variable
/// elimination. Soft findings enter as unary likelihood factors; hard findings
/// instantiate the tables they touch. Nodes with hard findings report exactly
/// 1 or 0.
///
/// Throws UnknownNode for evidence on nodes outside the network,
/// InvalidNetwork when validate_network fails, and EvidenceContradiction when
/// the evidence has zero probability under the model.
BeliefMap posterior_marginals(const Network& net, const EvidenceSet& ev);

/// Same contract as posterior_marginals, computed by summing the full joint.
/// Throws TooLarge above kEnumerationLimit nodes.
BeliefMap enumerate_marginals(const Network& net, const EvidenceSet& ev);

/// Greedy min-fill order over the nodes without hard findings, on the moral
/// graph with hard-evidence nodes removed. Ties go to the smaller NodeId.
std::vector<NodeId> elimination_order(const Network& net, const EvidenceSet& ev);

}  // namespace srw
