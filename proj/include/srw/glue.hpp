#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "srw/fragment.hpp"

namespace srw {

enum class PriorMerge {
  Strict,  // conflicting root priors (beyond 1e-9) are an error
  Mean,    // arithmetic mean of the two priors
};

/// How conditional probabilities are reallocated on a unified node.
/// Linear-additive boundaries merge as (min p_none, max p_all); noisy-or
/// leaks and shared weights merge by max. Only the prior rule is selectable.
struct GluePolicy {
  PriorMerge prior_merge = PriorMerge::Strict;
};

struct GlueReport {
  std::vector<NodeId> unified;                         // ids present in both inputs, sorted
  std::map<NodeId, std::vector<NodeId>> parent_unions;  // parents a unified node gained
  std::vector<std::string> warnings;
};

/// Unifies nodes with the same id, unions their parents and merges specs.
/// Throws CycleIntroduced, TableNotGluable, PriorConflict, SpecKindMismatch.
std::pair<Fragment, GlueReport> glue_pair(const Fragment& a, const Fragment& b, const GluePolicy& policy = {});

/// Left fold of glue_pair. Errors name the fragment that failed to glue.
std::pair<Fragment, GlueReport> glue_all(const std::vector<Fragment>& fragments, const GluePolicy& policy = {});

struct GlueManifest {
  std::vector<std::string> fragment_paths;  // resolved against the manifest's directory
  GluePolicy policy;
};

GlueManifest parse_glue_manifest(std::string_view bytes, const std::string& base_dir = ".");
GlueManifest load_glue_manifest(const std::string& path);

/// Loads every fragment named by the manifest and glues them in order.
std::pair<Fragment, GlueReport> glue_manifest(const GlueManifest& manifest);

std::string glue_report_json(const GlueReport& report);

}  // namespace srw
