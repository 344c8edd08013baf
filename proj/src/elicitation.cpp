#include "srw/elicitation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "srw/error.hpp"

namespace srw {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    std::size_t b = 0, e = cur.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(cur[b])) && cur[b] != '*') ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(cur[e - 1])) && cur[e - 1] != '*') --e;
    if (e > b) out.push_back(cur.substr(b, e - b));
    cur.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  flush();
  return out;
}

namespace {

// Wildcards take as few tokens as possible, leftmost first.
bool match(const std::vector<std::string>& pat, std::size_t pi, const std::vector<std::string>& toks, std::size_t ti,
           std::vector<std::pair<std::size_t, std::size_t>>& captures) {
  if (pi == pat.size()) return ti == toks.size();
  if (pat[pi] == "*") {
    for (std::size_t end = ti; end <= toks.size(); ++end) {
      captures.emplace_back(ti, end);
      if (match(pat, pi + 1, toks, end, captures)) return true;
      captures.pop_back();
    }
    return false;
  }
  if (ti < toks.size() && toks[ti] == pat[pi]) return match(pat, pi + 1, toks, ti + 1, captures);
  return false;
}

std::string expand(const std::string& tmpl, const std::vector<std::string>& toks,
                   const std::vector<std::pair<std::size_t, std::size_t>>& captures) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '$' && i + 1 < tmpl.size() && std::isdigit(static_cast<unsigned char>(tmpl[i + 1]))) {
      std::size_t j = i + 1;
      std::size_t n = 0;
      while (j < tmpl.size() && std::isdigit(static_cast<unsigned char>(tmpl[j]))) n = n * 10 + static_cast<std::size_t>(tmpl[j++] - '0');
      if (n >= 1 && n <= captures.size()) {
        auto [b, e] = captures[n - 1];
        for (std::size_t k = b; k < e; ++k) {
          if (k > b) out += ' ';
          out += toks[k];
        }
      }
      i = j - 1;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

}  // namespace

std::vector<PatternRule> parse_rulebook(std::string_view bytes) {
  const auto doc = detail::parse_json(bytes, "rulebook");
  detail::check_keys(doc, "", {"patterns"});
  const auto& list = detail::get_array(doc, "patterns", "");
  std::vector<PatternRule> rules;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto path = detail::index_path("patterns", i);
    detail::check_keys(list[i], path, {"id", "pattern", "emit"});
    PatternRule r;
    r.id = detail::get_string(list[i], "id", path);
    if (r.id.empty()) detail::schema_error(detail::join_path(path, "id"), "empty rule id");
    if (!ids.insert(r.id).second) detail::schema_error(detail::join_path(path, "id"), "duplicate rule id '" + r.id + "'");
    r.pattern = tokenize(detail::get_string(list[i], "pattern", path));
    if (std::all_of(r.pattern.begin(), r.pattern.end(), [](const std::string& t) { return t == "*"; })) {
      throw Error(ErrorKind::EmptyPattern, detail::join_path(path, "pattern") + ": rule '" + r.id +
                                               "' needs at least one non-wildcard token");
    }
    const auto& emit = list[i].at("emit");
    const auto emit_path = detail::join_path(path, "emit");
    detail::check_keys(emit, emit_path, {"topic", "body"});
    r.emit_topic = detail::get_string(emit, "topic", emit_path);
    r.emit_body = detail::get_string(emit, "body", emit_path);
    rules.push_back(std::move(r));
  }
  return rules;
}

std::vector<PatternRule> load_rulebook(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rulebook(ss.str());
}

Translation translate(std::string_view text, const std::vector<PatternRule>& rules) {
  Translation out;
  const auto toks = tokenize(text);
  for (const auto& rule : rules) {
    std::vector<std::pair<std::size_t, std::size_t>> captures;
    if (!match(rule.pattern, 0, toks, 0, captures)) continue;
    out.messages.push_back({rule.emit_topic, expand(rule.emit_body, toks, captures), "translator", 0});
  }
  if (out.messages.empty()) out.diagnostics.push_back("untranslated: no pattern matched");
  return out;
}

}  // namespace srw
