#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <json.hpp>

#include "srw/glue.hpp"
#include "srw/inference.hpp"
#include "support.hpp"

using namespace srw;

namespace {

const std::vector<std::string> kCorpus{"example21.json", "rti.json", "data_distribution.json", "pdes_kernel.json",
                                       "federation.json"};

std::vector<Fragment> corpus_fragments() {
  std::vector<Fragment> out;
  for (const auto& name : kCorpus) out.push_back(load_fragment(test::corpus(name)));
  return out;
}

RequirementNode prior(const NodeId& id, double p) { return {id, "", "", {}, PriorSpec{p}}; }
RequirementNode la(const NodeId& id, std::vector<NodeId> parents, double none, double all) {
  return {id, "", "", std::move(parents), LinearAdditiveSpec{none, all}};
}

ErrorKind glue_error(const Fragment& a, const Fragment& b, const GluePolicy& policy = {}) {
  try {
    glue_pair(a, b, policy);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("glue succeeded");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("shared nodes are unified and parents unioned") {
  Fragment a{"a", 1, {prior("x", 0.3), prior("y", 0.4), la("z", {"x"}, 0.1, 0.6)}};
  Fragment b{"b", 1, {prior("w", 0.5), prior("y", 0.4), la("z", {"w", "y"}, 0.2, 0.9)}};
  const auto [g, report] = glue_pair(a, b);
  CHECK(g.nodes.size() == 4);
  const auto* z = g.find("z");
  REQUIRE(z);
  CHECK(canonical_parents(z->parents) == std::vector<NodeId>{"w", "x", "y"});
  const auto& spec = std::get<LinearAdditiveSpec>(z->cpt_spec);
  CHECK(spec.p_none == 0.1);
  CHECK(spec.p_all == 0.9);
  CHECK(report.unified == std::vector<NodeId>{"y", "z"});
  CHECK(report.parent_unions.at("z") == std::vector<NodeId>{"w", "x", "y"});
  CHECK(report.parent_unions.count("y") == 0);
}

TEST_CASE("noisy-or leaks and shared weights merge by max") {
  Fragment a{"a", 1, {prior("p", 0.5), prior("q", 0.5), {"n", "", "", {"p", "q"}, NoisyOrSpec{0.05, {{"p", 0.4}, {"q", 0.7}}}}}};
  Fragment b{"b", 1, {prior("p", 0.5), prior("r", 0.5), {"n", "", "", {"p", "r"}, NoisyOrSpec{0.02, {{"p", 0.6}, {"r", 0.1}}}}}};
  const auto [g, report] = glue_pair(a, b);
  const auto& spec = std::get<NoisyOrSpec>(g.find("n")->cpt_spec);
  CHECK(spec.leak == 0.05);
  CHECK(spec.weights == std::map<NodeId, double>{{"p", 0.6}, {"q", 0.7}, {"r", 0.1}});
}

TEST_CASE("prior conflicts") {
  Fragment a{"a", 1, {prior("x", 0.3)}};
  Fragment b{"b", 1, {prior("x", 0.5)}};
  CHECK(glue_error(a, b) == ErrorKind::PriorConflict);
  const auto [g, report] = glue_pair(a, b, GluePolicy{PriorMerge::Mean});
  CHECK(std::get<PriorSpec>(g.find("x")->cpt_spec).p_implied == doctest::Approx(0.4));
  CHECK(report.warnings.size() == 1);
  Fragment c{"c", 1, {prior("x", 0.3 + 1e-12)}};
  CHECK_NOTHROW(glue_pair(a, c));
}

TEST_CASE("a root prior yields to the other fragment's conditional spec") {
  Fragment a{"a", 1, {prior("x", 0.3), prior("y", 0.2)}};
  Fragment b{"b", 1, {prior("x", 0.3), la("y", {"x"}, 0.1, 0.8)}};
  const auto ab = glue_pair(a, b).first;
  const auto ba = glue_pair(b, a).first;
  CHECK(std::holds_alternative<LinearAdditiveSpec>(ab.find("y")->cpt_spec));
  CHECK(semantically_equal(ab, ba));
}

TEST_CASE("explicit tables are not extended to new parents") {
  Fragment a{"a", 1, {prior("x", 0.3), {"y", "", "", {"x"}, TableSpec{{{0.1, 0.9}}}}}};
  Fragment b{"b", 1, {prior("w", 0.3), la("y", {"w"}, 0.1, 0.9)}};
  CHECK(glue_error(a, b) == ErrorKind::TableNotGluable);
  Fragment c{"c", 1, {prior("x", 0.3), {"y", "", "", {"x"}, TableSpec{{{0.2, 0.9}}}}}};
  CHECK(glue_error(a, c) == ErrorKind::TableNotGluable);
  Fragment d{"d", 1, {prior("x", 0.3), la("y", {"x"}, 0.1, 0.9)}};
  CHECK(glue_error(a, d) == ErrorKind::SpecKindMismatch);
}

TEST_CASE("the cycle pair is rejected with the path named") {
  const auto a = load_fragment(test::corpus("cycle_a.json"));
  const auto b = load_fragment(test::corpus("cycle_b.json"));
  try {
    glue_pair(a, b);
    FAIL("cycle accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CycleIntroduced);
    CHECK(std::string(e.detail()).find("x -> y -> x") != std::string::npos);
  }
  try {
    glue_manifest(load_glue_manifest(test::corpus("cycle_manifest.json")));
    FAIL("cycle accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CycleIntroduced);
    CHECK(std::string(e.detail()).find("'cycle-b'") != std::string::npos);
    CHECK(std::string(e.detail()).find("x -> y -> x") != std::string::npos);
  }
}

TEST_CASE("gluing a fragment with itself is the identity") {
  for (const auto& frag : corpus_fragments()) {
    CAPTURE(frag.name);
    const auto [g, report] = glue_pair(frag, frag);
    CHECK(semantically_equal(g, frag));
    CHECK(report.unified.size() == frag.nodes.size());
    CHECK(report.parent_unions.empty());
  }
}

TEST_CASE("pairwise gluing of the corpus commutes") {
  const auto frags = corpus_fragments();
  for (std::size_t i = 0; i < frags.size(); ++i) {
    for (std::size_t j = i + 1; j < frags.size(); ++j) {
      CAPTURE(frags[i].name);
      CAPTURE(frags[j].name);
      CHECK(semantically_equal(glue_pair(frags[i], frags[j]).first, glue_pair(frags[j], frags[i]).first));
    }
  }
}

TEST_CASE("every permutation of the corpus glues to the same network") {
  auto frags = corpus_fragments();
  std::vector<int> idx{0, 1, 2, 3, 4};
  const auto reference = glue_all(frags).first;
  int count = 0;
  do {
    std::vector<Fragment> ordered;
    for (int i : idx) ordered.push_back(frags[i]);
    CHECK(semantically_equal(glue_all(ordered).first, reference));
    ++count;
  } while (std::next_permutation(idx.begin(), idx.end()));
  CHECK(count == 120);
  CHECK(reference.nodes.size() == 10);
  CHECK(validate_network(compile(reference)).ok());
}

TEST_CASE("gluing does not disturb the time-management marginals") {
  const auto glued = glue_all(corpus_fragments()).first;
  EvidenceSet ev;
  ev.set_hard("distributed_sim", State::Implied);
  ev.set_hard("pdes", State::Implied);
  const auto b = posterior_marginals(compile(glued), ev);
  CHECK(std::abs(b.at("time_mgmt") - 0.8) <= 1e-9);
  CHECK(std::abs(b.at("time_mgmt_msgs") - 0.68) <= 1e-9);
}

TEST_CASE("manifests") {
  const auto m = load_glue_manifest(test::corpus("manifest.json"));
  REQUIRE(m.fragment_paths.size() == 5);
  CHECK(std::filesystem::path(m.fragment_paths[0]).filename() == "example21.json");
  CHECK(std::filesystem::exists(m.fragment_paths[4]));
  CHECK(m.policy.prior_merge == PriorMerge::Strict);

  const auto mean = parse_glue_manifest(R"({"fragments":["a.json"],"policy":{"prior_merge":"mean"}})", "/data");
  CHECK(mean.policy.prior_merge == PriorMerge::Mean);
  CHECK(mean.fragment_paths[0] == "/data/a.json");
  CHECK_THROWS_AS(parse_glue_manifest(R"({"fragments":[],"extra":1})"), Error);
  CHECK_THROWS_AS(parse_glue_manifest(R"({"fragments":["a"],"policy":{"prior_merge":"median"}})"), Error);
}

TEST_CASE("glue errors name the offending fragment") {
  Fragment a{"first", 1, {prior("x", 0.3)}};
  Fragment b{"second", 1, {prior("x", 0.3)}};
  Fragment c{"third", 1, {prior("x", 0.9)}};
  try {
    glue_all({a, b, c});
    FAIL("conflict accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PriorConflict);
    CHECK(std::string(e.detail()).find("'third'") != std::string::npos);
  }
}

TEST_CASE("the report serializes as JSON") {
  const auto [g, report] = glue_all(corpus_fragments());
  const auto j = nlohmann::json::parse(glue_report_json(report));
  CHECK(j.at("unified").size() == report.unified.size());
  CHECK(j.at("parent_unions").contains("rti"));
}
