#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "srw/network.hpp"

namespace srw {

/// "Miscategorized" items count as Incorrect.
enum class Assessment { Correct, Partial, Incorrect };

std::string_view to_string(Assessment a);

struct GoldStandard {
  std::set<NodeId> should_imply;
  std::map<NodeId, Assessment> labels;  // may include false positives
};

/// Exact counts are kept next to the fractions so callers can check ratios
/// without floating-point drift.
struct Metrics {
  std::size_t n_implied = 0;
  std::size_t n_correct = 0;
  std::size_t n_partial = 0;
  std::size_t n_incorrect = 0;
  std::size_t n_should_imply = 0;
  std::size_t n_covered = 0;

  // absent when nothing was implied
  std::optional<double> pct_correct;
  std::optional<double> pct_partial;
  std::optional<double> pct_incorrect;
  // absent when the gold standard has no should-imply items
  std::optional<double> coverage;
};

/// Throws MissingLabel if an implied node has no assessment.
Metrics score(const std::set<NodeId>& implied, const GoldStandard& gold);

GoldStandard parse_gold(std::string_view bytes);
GoldStandard load_gold(const std::string& path);

/// Accepts a JSON array of ids, {"implied": [...]}, or one id per line.
std::set<NodeId> parse_implied_list(std::string_view bytes);

std::string metrics_json(const Metrics& m);
/// Aligned two-column table, percentages with 4 decimals.
std::string metrics_table(const Metrics& m);

}  // namespace srw
