#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace srw {

/// Unit of communication between the translator, agents and the operator.
struct Message {
  std::string topic;
  std::string body;
  std::string source;
  std::uint64_t seq = 0;  // assigned by the session

  bool operator==(const Message&) const = default;
};

/// ELIZA-style rule: whitespace tokens with "*" wildcards. The emitted body
/// may reference wildcard captures as $1, $2, ...
struct PatternRule {
  std::string id;
  std::vector<std::string> pattern;  // lowercased tokens
  std::string emit_topic;
  std::string emit_body;
};

/// Lowercases, splits on whitespace, strips punctuation at token edges.
std::vector<std::string> tokenize(std::string_view text);

/// Rule order in the file is match priority. Throws SchemaViolation or
/// EmptyPattern.
std::vector<PatternRule> parse_rulebook(std::string_view bytes);
std::vector<PatternRule> load_rulebook(const std::string& path);

struct Translation {
  std::vector<Message> messages;
  std::vector<std::string> diagnostics;

  bool untranslated() const { return messages.empty(); }
};

/// Every matching rule fires, in rulebook order.
Translation translate(std::string_view text, const std::vector<PatternRule>& rules);

}  // namespace srw
