#include "srw/fragment.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace srw {

using detail::json;

namespace {

bool in_unit(double p) {
  return std::isfinite(p) && p >= -kProbabilityTolerance && p <= 1.0 + kProbabilityTolerance;
}

void require_probability(double p, const std::string& what) {
  if (!in_unit(p)) throw Error(ErrorKind::BadProbability, what + " is outside [0,1]");
}

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  return std::none_of(id.begin(), id.end(), [](unsigned char c) { return std::isspace(c) || c == ',' || c == '='; });
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string_view spec_kind(const CptSpec& spec) {
  return std::visit(overloaded{
                        [](const PriorSpec&) { return std::string_view("prior"); },
                        [](const TableSpec&) { return std::string_view("table"); },
                        [](const LinearAdditiveSpec&) { return std::string_view("linear_additive"); },
                        [](const NoisyOrSpec&) { return std::string_view("noisy_or"); },
                    },
                    spec);
}

const RequirementNode* Fragment::find(const NodeId& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

std::vector<NodeId> canonical_parents(std::vector<NodeId> parents) {
  std::sort(parents.begin(), parents.end());
  parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
  return parents;
}

CptTable linear_additive_cpt(double p_none, double p_all, const std::vector<NodeId>& parents) {
  if (parents.empty()) throw Error(ErrorKind::NoParents, "linear-additive table needs at least one parent");
  require_probability(p_none, "p_none");
  require_probability(p_all, "p_all");
  const std::size_t n = parents.size();
  CptTable t;
  t.p_implied.resize(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < t.p_implied.size(); ++mask) {
    const auto k = static_cast<double>(std::popcount(mask));
    t.p_implied[mask] = p_none + (k / static_cast<double>(n)) * (p_all - p_none);
  }
  return t;
}

CptTable noisy_or_cpt(double leak, const std::map<NodeId, double>& weights, const std::vector<NodeId>& parents) {
  require_probability(leak, "leak");
  std::set<NodeId> parent_set(parents.begin(), parents.end());
  if (parent_set.size() != parents.size() || weights.size() != parents.size()) {
    throw Error(ErrorKind::WeightParentMismatch, "noisy-or weights must be keyed exactly by the parents");
  }
  for (const auto& [p, w] : weights) {
    if (!parent_set.count(p)) {
      throw Error(ErrorKind::WeightParentMismatch, "noisy-or weight for '" + p + "' which is not a parent");
    }
    require_probability(w, "weight of '" + p + "'");
  }
  CptTable t;
  t.p_implied.resize(std::size_t{1} << parents.size());
  for (std::size_t mask = 0; mask < t.p_implied.size(); ++mask) {
    double off = 1.0 - leak;
    for (std::size_t i = 0; i < parents.size(); ++i)
      if ((mask >> i) & 1) off *= 1.0 - weights.at(parents[i]);
    t.p_implied[mask] = 1.0 - off;
  }
  return t;
}

void validate_fragment(const Fragment& frag) {
  if (frag.version != kFragmentFormatVersion) {
    throw Error(ErrorKind::SchemaViolation, "unsupported srw_version " + std::to_string(frag.version));
  }
  std::set<NodeId> ids;
  for (const auto& n : frag.nodes) {
    if (!valid_id(n.id)) throw Error(ErrorKind::SchemaViolation, "invalid node id '" + n.id + "'");
    if (!ids.insert(n.id).second) throw Error(ErrorKind::DuplicateNode, "duplicate node '" + n.id + "'");
  }
  std::map<NodeId, std::vector<NodeId>> parents;
  for (const auto& n : frag.nodes) {
    std::set<NodeId> seen;
    for (const auto& p : n.parents) {
      if (!ids.count(p)) throw Error(ErrorKind::UnknownParent, "node '" + n.id + "' lists unknown parent '" + p + "'");
      if (!seen.insert(p).second) {
        throw Error(ErrorKind::SchemaViolation, "node '" + n.id + "' lists parent '" + p + "' twice");
      }
    }
    parents[n.id] = n.parents;
    const bool root = n.parents.empty();
    const auto kind = spec_kind(n.cpt_spec);
    if (root != (kind == "prior")) {
      throw Error(root ? ErrorKind::NoParents : ErrorKind::SchemaViolation, "node '" + n.id + "': " +
                                                  (root ? "root nodes need a prior" : "nodes with parents cannot use a prior"));
    }
    std::visit(overloaded{
                   [&](const PriorSpec& s) { require_probability(s.p_implied, "prior of '" + n.id + "'"); },
                   [&](const TableSpec& s) {
                     if (s.table.p_implied.size() != (std::size_t{1} << n.parents.size())) {
                       throw Error(ErrorKind::SchemaViolation, "table of '" + n.id + "' has wrong row count");
                     }
                     for (double p : s.table.p_implied) require_probability(p, "table row of '" + n.id + "'");
                   },
                   [&](const LinearAdditiveSpec& s) {
                     require_probability(s.p_none, "p_none of '" + n.id + "'");
                     require_probability(s.p_all, "p_all of '" + n.id + "'");
                   },
                   [&](const NoisyOrSpec& s) { noisy_or_cpt(s.leak, s.weights, canonical_parents(n.parents)); },
               },
               n.cpt_spec);
  }
  std::vector<NodeId> order(ids.begin(), ids.end());
  if (auto cycle = find_cycle(order, parents)) {
    throw Error(ErrorKind::CycleInFragment, "cycle " + format_path(*cycle));
  }
}

std::vector<std::string> fragment_warnings(const Fragment& frag) {
  std::vector<std::string> out;
  for (const auto& n : frag.nodes) {
    if (auto* la = std::get_if<LinearAdditiveSpec>(&n.cpt_spec); la && la->p_none > la->p_all) {
      out.push_back("node '" + n.id + "': linear_additive p_none > p_all (inhibitory)");
    }
  }
  return out;
}

namespace {

// "a=1,b=0" -> row mask over `parents` (canonical order). Key order is free.
std::size_t parse_row_key(const std::string& key, const std::vector<NodeId>& parents, const std::string& path) {
  std::size_t mask = 0;
  std::set<NodeId> seen;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) detail::schema_error(path, "row key '" + key + "' is not of the form parent=0|1");
    std::string name = part.substr(0, eq);
    std::string value = part.substr(eq + 1);
    auto it = std::find(parents.begin(), parents.end(), name);
    if (it == parents.end()) detail::schema_error(path, "row key names '" + name + "' which is not a parent");
    if (!seen.insert(name).second) detail::schema_error(path, "row key names '" + name + "' twice");
    if (value == "1") {
      mask |= std::size_t{1} << static_cast<std::size_t>(it - parents.begin());
    } else if (value != "0") {
      detail::schema_error(path, "row key value for '" + name + "' must be 0 or 1");
    }
  }
  if (seen.size() != parents.size()) detail::schema_error(path, "row key '" + key + "' does not cover every parent");
  return mask;
}

CptSpec parse_cpt(const json& j, const std::vector<NodeId>& parents, const std::string& path) {
  detail::expect_object(j, path);
  if (!j.contains("kind")) detail::schema_error(detail::join_path(path, "kind"), "missing required field");
  const std::string kind = detail::get_string(j, "kind", path);
  if (kind == "prior") {
    detail::check_keys(j, path, {"kind", "p_implied"});
    return PriorSpec{detail::get_probability(j, "p_implied", path)};
  }
  if (kind == "table") {
    detail::check_keys(j, path, {"kind", "rows"});
    const auto& rows = j.at("rows");
    const auto rows_path = detail::join_path(path, "rows");
    detail::expect_object(rows, rows_path);
    const auto canon = canonical_parents(parents);
    TableSpec spec;
    spec.table.p_implied.assign(std::size_t{1} << canon.size(), -1.0);
    for (auto it = rows.begin(); it != rows.end(); ++it) {
      auto row_path = rows_path + "[\"" + it.key() + "\"]";
      auto mask = parse_row_key(it.key(), canon, row_path);
      if (spec.table.p_implied[mask] >= 0.0) detail::schema_error(row_path, "duplicate row");
      spec.table.p_implied[mask] = detail::as_probability(it.value(), row_path);
    }
    for (std::size_t mask = 0; mask < spec.table.p_implied.size(); ++mask) {
      if (spec.table.p_implied[mask] < 0.0) detail::schema_error(rows_path, "missing row '" + row_key(canon, mask) + "'");
    }
    return spec;
  }
  if (kind == "linear_additive") {
    detail::check_keys(j, path, {"kind", "p_none", "p_all"});
    return LinearAdditiveSpec{detail::get_probability(j, "p_none", path), detail::get_probability(j, "p_all", path)};
  }
  if (kind == "noisy_or") {
    detail::check_keys(j, path, {"kind", "leak", "weights"});
    NoisyOrSpec spec;
    spec.leak = detail::get_probability(j, "leak", path);
    const auto& w = j.at("weights");
    const auto w_path = detail::join_path(path, "weights");
    detail::expect_object(w, w_path);
    for (auto it = w.begin(); it != w.end(); ++it) {
      spec.weights[it.key()] = detail::as_probability(it.value(), detail::join_path(w_path, it.key()));
    }
    return spec;
  }
  detail::schema_error(detail::join_path(path, "kind"), "unknown cpt kind '" + kind + "'");
}

json spec_to_json(const RequirementNode& n) {
  json::object_t out;
  std::visit(overloaded{
                 [&](const PriorSpec& s) {
                   out["kind"] = "prior";
                   out["p_implied"] = s.p_implied;
                 },
                 [&](const TableSpec& s) {
                   out["kind"] = "table";
                   const auto canon = canonical_parents(n.parents);
                   json rows = json::object();
                   for (std::size_t mask = 0; mask < s.table.p_implied.size(); ++mask)
                     rows[row_key(canon, mask)] = s.table.p_implied[mask];
                   out["rows"] = rows;
                 },
                 [&](const LinearAdditiveSpec& s) {
                   out["kind"] = "linear_additive";
                   out["p_none"] = s.p_none;
                   out["p_all"] = s.p_all;
                 },
                 [&](const NoisyOrSpec& s) {
                   out["kind"] = "noisy_or";
                   out["leak"] = s.leak;
                   out["weights"] = s.weights;
                 },
             },
             n.cpt_spec);
  return out;
}

}  // namespace

Fragment parse_fragment(std::string_view bytes) {
  const json doc = detail::parse_json(bytes, "fragment");
  detail::check_keys(doc, "", {"srw_version", "name", "nodes"});
  const auto& version = doc.at("srw_version");
  if (!version.is_number_integer()) detail::schema_error("srw_version", "expected an integer");
  Fragment frag;
  frag.version = version.get<int>();
  if (frag.version != kFragmentFormatVersion) {
    detail::schema_error("srw_version", "unsupported version " + std::to_string(frag.version));
  }
  frag.name = detail::get_string(doc, "name", "");
  const auto& nodes = detail::get_array(doc, "nodes", "");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto path = detail::index_path("nodes", i);
    const auto& jn = nodes[i];
    detail::check_keys(jn, path, {"id", "cpt"}, {"title", "description", "parents"});
    RequirementNode node;
    node.id = detail::get_string(jn, "id", path);
    if (!valid_id(node.id)) detail::schema_error(detail::join_path(path, "id"), "invalid node id '" + node.id + "'");
    node.title = detail::get_string_or(jn, "title", path, "");
    node.description = detail::get_string_or(jn, "description", path, "");
    if (jn.contains("parents")) {
      const auto& ps = detail::get_array(jn, "parents", path);
      for (std::size_t k = 0; k < ps.size(); ++k) {
        if (!ps[k].is_string()) detail::schema_error(detail::index_path(detail::join_path(path, "parents"), k), "expected a string");
        node.parents.push_back(ps[k].get<std::string>());
      }
    }
    node.cpt_spec = parse_cpt(jn.at("cpt"), node.parents, detail::join_path(path, "cpt"));
    frag.nodes.push_back(std::move(node));
  }
  validate_fragment(frag);
  return frag;
}

Fragment load_fragment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_fragment(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.detail());
  }
}

std::string serialize_fragment(const Fragment& frag) {
  nlohmann::ordered_json doc;
  doc["srw_version"] = frag.version;
  doc["name"] = frag.name;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : frag.nodes) {
    nlohmann::ordered_json jn;
    jn["id"] = n.id;
    jn["title"] = n.title;
    jn["description"] = n.description;
    jn["parents"] = n.parents;
    jn["cpt"] = spec_to_json(n);
    doc["nodes"].push_back(std::move(jn));
  }
  return doc.dump(2) + "\n";
}

Network compile(const Fragment& frag) {
  validate_fragment(frag);
  Network net;
  for (const auto& n : frag.nodes) {
    auto parents = canonical_parents(n.parents);
    CptTable table = std::visit(overloaded{
                                    [](const PriorSpec& s) { return CptTable{{s.p_implied}}; },
                                    [](const TableSpec& s) { return s.table; },
                                    [&](const LinearAdditiveSpec& s) { return linear_additive_cpt(s.p_none, s.p_all, parents); },
                                    [&](const NoisyOrSpec& s) { return noisy_or_cpt(s.leak, s.weights, parents); },
                                },
                                n.cpt_spec);
    net.add_node(n.id, std::move(parents), std::move(table));
  }
  return net;
}

bool semantically_equal(const Fragment& a, const Fragment& b, double tol) {
  if (a.nodes.size() != b.nodes.size()) return false;
  const Network na = compile(a);
  const Network nb = compile(b);
  for (const auto& id : na.nodes) {
    if (!nb.contains(id)) return false;
    if (na.parents.at(id) != nb.parents.at(id)) return false;
    const auto& ra = na.cpt.at(id).p_implied;
    const auto& rb = nb.cpt.at(id).p_implied;
    if (ra.size() != rb.size()) return false;
    for (std::size_t i = 0; i < ra.size(); ++i)
      if (std::abs(ra[i] - rb[i]) > tol) return false;
  }
  return true;
}

bool ImpliedSet::contains(const NodeId& id) const {
  return std::any_of(implied.begin(), implied.end(), [&](const RankedBelief& r) { return r.node == id; });
}

std::vector<NodeId> ImpliedSet::ids() const {
  std::vector<NodeId> out;
  for (const auto& r : implied) out.push_back(r.node);
  return out;
}

std::vector<RankedBelief> rank_beliefs(const BeliefMap& beliefs) {
  std::vector<RankedBelief> out;
  for (const auto& [id, b] : beliefs) out.push_back({id, b});
  std::stable_sort(out.begin(), out.end(), [](const RankedBelief& x, const RankedBelief& y) {
    if (x.belief != y.belief) return x.belief > y.belief;
    return x.node < y.node;
  });
  return out;
}

ImpliedSet classify(const BeliefMap& beliefs, double threshold, double band) {
  ImpliedSet out;
  out.threshold = threshold;
  out.band = band;
  for (auto& r : rank_beliefs(beliefs)) {
    if (r.belief >= threshold) {
      out.implied.push_back(r);
    } else if (r.belief >= threshold - band) {
      out.borderline.push_back(r);
    }
  }
  return out;
}

}  // namespace srw
