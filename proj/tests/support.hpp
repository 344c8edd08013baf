#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "srw/fragment.hpp"
#include "srw/inference.hpp"
#include "srw/network.hpp"

namespace srw::test {

inline std::string corpus(const std::string& rel) { return std::string(SRW_CORPUS_DIR) + "/" + rel; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two roots feeding time_mgmt, which feeds time_mgmt_msgs. Built by hand so
// the tests do not depend on the fragment parser.
inline Network example_network() {
  Network net;
  net.add_node("distributed_sim", {}, {{0.2}});
  net.add_node("pdes", {}, {{0.2}});
  // bit 0 = distributed_sim, bit 1 = pdes
  net.add_node("time_mgmt", {"distributed_sim", "pdes"}, {{0.2, 0.4, 0.4, 0.8}});
  net.add_node("time_mgmt_msgs", {"time_mgmt"}, {{0.2, 0.8}});
  return net;
}

inline std::string node_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "n%02d", i);
  return buf;
}

// Random DAG: node i draws up to max_parents parents from nodes before it.
// CPT entries avoid 0 and 1 unless allow_extremes is set.
inline Network random_network(std::mt19937_64& rng, int n, int max_parents, bool allow_extremes = false) {
  Network net;
  std::uniform_real_distribution<double> prob(0.01, 0.99);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    std::vector<NodeId> parents;
    if (i > 0) {
      std::uniform_int_distribution<int> count(0, std::min(i, max_parents));
      std::vector<int> pool(i);
      for (int k = 0; k < i; ++k) pool[k] = k;
      std::shuffle(pool.begin(), pool.end(), rng);
      const int c = count(rng);
      for (int k = 0; k < c; ++k) parents.push_back(node_name(pool[k]));
    }
    CptTable t;
    t.p_implied.resize(std::size_t{1} << parents.size());
    for (auto& p : t.p_implied) {
      p = prob(rng);
      if (allow_extremes && coin(rng) < 0.1) p = coin(rng) < 0.5 ? 0.0 : 1.0;
    }
    net.add_node(node_name(i), parents, t);
  }
  return net;
}

inline EvidenceSet random_evidence(std::mt19937_64& rng, const Network& net, double p_hard = 0.2,
                                   double p_soft = 0.2) {
  EvidenceSet ev;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> lik(0.05, 3.0);
  for (const auto& id : net.nodes) {
    const double r = coin(rng);
    if (r < p_hard) {
      ev.set_hard(id, coin(rng) < 0.5 ? State::Implied : State::NotImplied);
    } else if (r < p_hard + p_soft) {
      ev.set_soft(id, {lik(rng), lik(rng)});
    }
  }
  return ev;
}

inline double max_abs_diff(const BeliefMap& a, const BeliefMap& b) {
  double worst = a.size() == b.size() ? 0.0 : INFINITY;
  for (const auto& [id, v] : a) {
    auto it = b.find(id);
    worst = std::max(worst, it == b.end() ? INFINITY : std::abs(v - it->second));
  }
  return worst;
}

}  // namespace srw::test
