#include "srw/glue.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace srw {

namespace {

constexpr double kPriorAgreement = 1e-9;

std::vector<NodeId> sorted_union(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::set<NodeId> s(a.begin(), a.end());
  s.insert(b.begin(), b.end());
  return {s.begin(), s.end()};
}

bool same_set(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  return canonical_parents(a) == canonical_parents(b);
}

CptSpec merge_spec(const RequirementNode& a, const RequirementNode& b, const std::vector<NodeId>& merged_parents,
                   const GluePolicy& policy, std::vector<std::string>& warnings) {
  const auto ka = spec_kind(a.cpt_spec);
  const auto kb = spec_kind(b.cpt_spec);
  const NodeId& id = a.id;

  if (ka == "table" || kb == "table") {
    for (const RequirementNode* n : {&a, &b}) {
      if (spec_kind(n->cpt_spec) == "table" && !same_set(n->parents, merged_parents)) {
        throw Error(ErrorKind::TableNotGluable,
                    "node '" + id + "' has an explicit table and gluing changes its parent set; tables cannot be "
                    "extended to new parents, convert it to linear_additive or noisy_or first");
      }
    }
    if (ka == "table" && kb == "table") {
      const auto& ra = std::get<TableSpec>(a.cpt_spec).table.p_implied;
      const auto& rb = std::get<TableSpec>(b.cpt_spec).table.p_implied;
      for (std::size_t i = 0; i < ra.size(); ++i) {
        if (std::abs(ra[i] - rb[i]) > kPriorAgreement) {
          throw Error(ErrorKind::TableNotGluable, "node '" + id + "' has explicit tables that disagree");
        }
      }
      return a.cpt_spec;
    }
    if (ka == "prior" || kb == "prior") {
      warnings.push_back("node '" + id + "': root prior dropped in favour of the explicit table");
      return ka == "table" ? a.cpt_spec : b.cpt_spec;
    }
    throw Error(ErrorKind::SpecKindMismatch,
                "node '" + id + "' is " + std::string(ka) + " in one fragment and " + std::string(kb) + " in the other");
  }

  if (ka == "prior" && kb == "prior") {
    const double pa = std::get<PriorSpec>(a.cpt_spec).p_implied;
    const double pb = std::get<PriorSpec>(b.cpt_spec).p_implied;
    if (std::abs(pa - pb) <= kPriorAgreement) return PriorSpec{std::min(pa, pb)};
    if (policy.prior_merge == PriorMerge::Mean) {
      warnings.push_back("node '" + id + "': conflicting priors averaged");
      return PriorSpec{(pa + pb) / 2.0};
    }
    std::ostringstream msg;
    msg << "node '" << id << "' has conflicting priors " << pa << " and " << pb;
    throw Error(ErrorKind::PriorConflict, msg.str());
  }
  if (ka == "prior" || kb == "prior") {
    // a root in one fragment, a child in the other: the child's spec carries the structure
    warnings.push_back("node '" + id + "': root prior dropped in favour of " + std::string(ka == "prior" ? kb : ka));
    return ka == "prior" ? b.cpt_spec : a.cpt_spec;
  }
  if (ka == "linear_additive" && kb == "linear_additive") {
    const auto& la = std::get<LinearAdditiveSpec>(a.cpt_spec);
    const auto& lb = std::get<LinearAdditiveSpec>(b.cpt_spec);
    return LinearAdditiveSpec{std::min(la.p_none, lb.p_none), std::max(la.p_all, lb.p_all)};
  }
  if (ka == "noisy_or" && kb == "noisy_or") {
    const auto& na = std::get<NoisyOrSpec>(a.cpt_spec);
    const auto& nb = std::get<NoisyOrSpec>(b.cpt_spec);
    NoisyOrSpec out;
    out.leak = std::max(na.leak, nb.leak);
    out.weights = na.weights;
    for (const auto& [p, w] : nb.weights) {
      auto [it, inserted] = out.weights.emplace(p, w);
      if (!inserted) it->second = std::max(it->second, w);
    }
    return out;
  }
  throw Error(ErrorKind::SpecKindMismatch,
              "node '" + id + "' is " + std::string(ka) + " in one fragment and " + std::string(kb) + " in the other");
}

}  // namespace

std::pair<Fragment, GlueReport> glue_pair(const Fragment& a, const Fragment& b, const GluePolicy& policy) {
  Fragment out;
  out.name = a.name == b.name ? a.name : a.name + "+" + b.name;
  out.version = kFragmentFormatVersion;
  GlueReport report;

  for (const auto& na : a.nodes) {
    const RequirementNode* nb = b.find(na.id);
    if (!nb) {
      out.nodes.push_back(na);
      continue;
    }
    report.unified.push_back(na.id);
    RequirementNode merged;
    merged.id = na.id;
    merged.parents = sorted_union(na.parents, nb->parents);
    merged.cpt_spec = merge_spec(na, *nb, merged.parents, policy, report.warnings);

    merged.title = nb->title.empty() ? na.title : nb->title;
    merged.description = nb->description.empty() ? na.description : nb->description;
    if (!na.title.empty() && !nb->title.empty() && na.title != nb->title) {
      report.warnings.push_back("node '" + na.id + "': title differs between fragments, using '" + nb->title + "'");
    }
    if (!na.description.empty() && !nb->description.empty() && na.description != nb->description) {
      report.warnings.push_back("node '" + na.id + "': description differs between fragments, using the later one");
    }

    std::vector<NodeId> gained;
    const auto pa = canonical_parents(na.parents);
    const auto pb = canonical_parents(nb->parents);
    for (const auto& p : merged.parents) {
      bool in_a = std::binary_search(pa.begin(), pa.end(), p);
      bool in_b = std::binary_search(pb.begin(), pb.end(), p);
      if (in_a != in_b) gained.push_back(p);
    }
    if (!gained.empty()) report.parent_unions[na.id] = std::move(gained);
    out.nodes.push_back(std::move(merged));
  }
  for (const auto& nb : b.nodes) {
    if (!a.find(nb.id)) out.nodes.push_back(nb);
  }
  std::sort(report.unified.begin(), report.unified.end());

  std::vector<NodeId> ids;
  std::map<NodeId, std::vector<NodeId>> parents;
  for (const auto& n : out.nodes) {
    ids.push_back(n.id);
    parents[n.id] = n.parents;
  }
  if (auto cycle = find_cycle(ids, parents)) {
    throw Error(ErrorKind::CycleIntroduced, "gluing introduces cycle " + format_path(*cycle));
  }
  validate_fragment(out);
  return {std::move(out), std::move(report)};
}

std::pair<Fragment, GlueReport> glue_all(const std::vector<Fragment>& fragments, const GluePolicy& policy) {
  if (fragments.empty()) throw Error(ErrorKind::SchemaViolation, "glue needs at least one fragment");
  Fragment acc = fragments.front();
  GlueReport total;
  std::set<NodeId> unified;
  for (std::size_t i = 1; i < fragments.size(); ++i) {
    std::pair<Fragment, GlueReport> step;
    try {
      step = glue_pair(acc, fragments[i], policy);
    } catch (const Error& e) {
      throw Error(e.kind(), "gluing fragment '" + fragments[i].name + "' (#" + std::to_string(i) + ") onto '" +
                                acc.name + "': " + e.detail());
    }
    acc = std::move(step.first);
    unified.insert(step.second.unified.begin(), step.second.unified.end());
    for (auto& [node, added] : step.second.parent_unions) {
      auto& dst = total.parent_unions[node];
      dst = sorted_union(dst, added);
    }
    for (auto& w : step.second.warnings) total.warnings.push_back(std::move(w));
  }
  total.unified.assign(unified.begin(), unified.end());
  return {std::move(acc), std::move(total)};
}

GlueManifest parse_glue_manifest(std::string_view bytes, const std::string& base_dir) {
  const auto doc = detail::parse_json(bytes, "glue manifest");
  detail::check_keys(doc, "", {"fragments"}, {"policy"});
  GlueManifest m;
  const auto& list = detail::get_array(doc, "fragments", "");
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!list[i].is_string()) detail::schema_error(detail::index_path("fragments", i), "expected a path string");
    std::filesystem::path p(list[i].get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    m.fragment_paths.push_back(p.lexically_normal().string());
  }
  if (m.fragment_paths.empty()) detail::schema_error("fragments", "at least one fragment is required");
  if (doc.contains("policy")) {
    const auto& pol = doc.at("policy");
    detail::check_keys(pol, "policy", {}, {"prior_merge"});
    const auto mode = detail::get_string_or(pol, "prior_merge", "policy", "strict");
    if (mode == "strict") {
      m.policy.prior_merge = PriorMerge::Strict;
    } else if (mode == "mean") {
      m.policy.prior_merge = PriorMerge::Mean;
    } else {
      detail::schema_error("policy.prior_merge", "expected 'strict' or 'mean'");
    }
  }
  return m;
}

GlueManifest load_glue_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto dir = std::filesystem::path(path).parent_path();
  return parse_glue_manifest(ss.str(), dir.empty() ? "." : dir.string());
}

std::pair<Fragment, GlueReport> glue_manifest(const GlueManifest& manifest) {
  std::vector<Fragment> frags;
  for (const auto& p : manifest.fragment_paths) frags.push_back(load_fragment(p));
  return glue_all(frags, manifest.policy);
}

std::string glue_report_json(const GlueReport& report) {
  nlohmann::ordered_json j;
  j["unified"] = report.unified;
  j["parent_unions"] = report.parent_unions;
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

}  // namespace srw
