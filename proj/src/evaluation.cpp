#include "srw/evaluation.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "json_util.hpp"

namespace srw {

std::string_view to_string(Assessment a) {
  switch (a) {
    case Assessment::Correct: return "correct";
    case Assessment::Partial: return "partial";
    case Assessment::Incorrect: return "incorrect";
  }
  return "unknown";
}

Metrics score(const std::set<NodeId>& implied, const GoldStandard& gold) {
  Metrics m;
  m.n_implied = implied.size();
  m.n_should_imply = gold.should_imply.size();
  for (const auto& id : implied) {
    auto it = gold.labels.find(id);
    if (it == gold.labels.end()) throw Error(ErrorKind::MissingLabel, "implied node '" + id + "' has no label");
    switch (it->second) {
      case Assessment::Correct: ++m.n_correct; break;
      case Assessment::Partial: ++m.n_partial; break;
      case Assessment::Incorrect: ++m.n_incorrect; break;
    }
    if (gold.should_imply.count(id)) ++m.n_covered;
  }
  if (m.n_implied > 0) {
    const auto n = static_cast<double>(m.n_implied);
    m.pct_correct = static_cast<double>(m.n_correct) / n;
    m.pct_partial = static_cast<double>(m.n_partial) / n;
    m.pct_incorrect = static_cast<double>(m.n_incorrect) / n;
  }
  if (m.n_should_imply > 0) {
    m.coverage = static_cast<double>(m.n_covered) / static_cast<double>(m.n_should_imply);
  }
  return m;
}

GoldStandard parse_gold(std::string_view bytes) {
  const auto doc = detail::parse_json(bytes, "gold standard");
  detail::check_keys(doc, "", {"should_imply", "labels"});
  GoldStandard g;
  const auto& should = detail::get_array(doc, "should_imply", "");
  for (std::size_t i = 0; i < should.size(); ++i) {
    if (!should[i].is_string()) detail::schema_error(detail::index_path("should_imply", i), "expected a string");
    g.should_imply.insert(should[i].get<std::string>());
  }
  const auto& labels = doc.at("labels");
  detail::expect_object(labels, "labels");
  for (auto it = labels.begin(); it != labels.end(); ++it) {
    const auto path = detail::join_path("labels", it.key());
    if (!it.value().is_string()) detail::schema_error(path, "expected a label string");
    const auto v = it.value().get<std::string>();
    if (v == "correct") {
      g.labels[it.key()] = Assessment::Correct;
    } else if (v == "partial") {
      g.labels[it.key()] = Assessment::Partial;
    } else if (v == "incorrect" || v == "miscategorized") {
      g.labels[it.key()] = Assessment::Incorrect;
    } else {
      detail::schema_error(path, "expected 'correct', 'partial' or 'incorrect'");
    }
  }
  return g;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

GoldStandard load_gold(const std::string& path) { return parse_gold(slurp(path)); }

std::set<NodeId> parse_implied_list(std::string_view bytes) {
  auto first = bytes.find_first_not_of(" \t\r\n");
  std::set<NodeId> out;
  if (first != std::string_view::npos && (bytes[first] == '[' || bytes[first] == '{')) {
    auto doc = detail::parse_json(bytes, "implied list");
    if (doc.is_object()) {
      detail::check_keys(doc, "", {"implied"}, {"threshold", "borderline", "mode"});
      doc = doc.at("implied");
    }
    if (!doc.is_array()) detail::schema_error("implied", "expected an array");
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto& v = doc[i];
      if (v.is_string()) {
        out.insert(v.get<std::string>());
      } else if (v.is_object() && v.contains("node") && v.at("node").is_string()) {
        out.insert(v.at("node").get<std::string>());
      } else {
        detail::schema_error(detail::index_path("implied", i), "expected a node id");
      }
    }
    return out;
  }
  std::istringstream in{std::string(bytes)};
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    out.insert(line.substr(b, e - b + 1));
  }
  return out;
}

std::string metrics_json(const Metrics& m) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  j["n_implied"] = m.n_implied;
  j["counts"] = {{"correct", m.n_correct}, {"partial", m.n_partial}, {"incorrect", m.n_incorrect}};
  j["pct_correct"] = opt(m.pct_correct);
  j["pct_partial"] = opt(m.pct_partial);
  j["pct_incorrect"] = opt(m.pct_incorrect);
  j["n_should_imply"] = m.n_should_imply;
  j["n_covered"] = m.n_covered;
  j["coverage"] = opt(m.coverage);
  return j.dump(2) + "\n";
}

std::string metrics_table(const Metrics& m) {
  auto pct = [](const std::optional<double>& v) { return v ? fixed4(*v * 100.0) + "%" : std::string("n/a"); };
  std::vector<std::pair<std::string, std::string>> rows{
      {"implied", std::to_string(m.n_implied)},
      {"correct", pct(m.pct_correct) + " (" + std::to_string(m.n_correct) + ")"},
      {"partial", pct(m.pct_partial) + " (" + std::to_string(m.n_partial) + ")"},
      {"incorrect", pct(m.pct_incorrect) + " (" + std::to_string(m.n_incorrect) + ")"},
      {"coverage", pct(m.coverage) + " (" + std::to_string(m.n_covered) + "/" + std::to_string(m.n_should_imply) + ")"},
  };
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  std::string out;
  for (const auto& [k, v] : rows) {
    out += k;
    out.append(width - k.size() + 2, ' ');
    out += v;
    out += '\n';
  }
  return out;
}

}  // namespace srw
