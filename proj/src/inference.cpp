#include "srw/inference.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <numeric>

namespace srw {
namespace {

// Factor over binary variables. vars is sorted ascending; bit i of a value
// index is the state of vars[i].
struct Factor {
  std::vector<int> vars;
  std::vector<double> vals;
};

Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                 std::back_inserter(out.vars));
  const std::size_t k = out.vars.size();
  // bit masks in the output index that feed each input index bit
  std::vector<std::size_t> a_bits, b_bits;
  for (std::size_t i = 0, j = 0; i < k; ++i) {
    if (j < a.vars.size() && a.vars[j] == out.vars[i]) {
      a_bits.push_back(std::size_t{1} << i);
      ++j;
    }
  }
  for (std::size_t i = 0, j = 0; i < k; ++i) {
    if (j < b.vars.size() && b.vars[j] == out.vars[i]) {
      b_bits.push_back(std::size_t{1} << i);
      ++j;
    }
  }
  out.vals.resize(std::size_t{1} << k);
  for (std::size_t idx = 0; idx < out.vals.size(); ++idx) {
    std::size_t ia = 0, ib = 0;
    for (std::size_t j = 0; j < a_bits.size(); ++j)
      if (idx & a_bits[j]) ia |= std::size_t{1} << j;
    for (std::size_t j = 0; j < b_bits.size(); ++j)
      if (idx & b_bits[j]) ib |= std::size_t{1} << j;
    out.vals[idx] = a.vals[ia] * b.vals[ib];
  }
  return out;
}

Factor sum_out(const Factor& f, int var) {
  auto it = std::find(f.vars.begin(), f.vars.end(), var);
  const std::size_t pos = static_cast<std::size_t>(it - f.vars.begin());
  Factor out;
  out.vars = f.vars;
  out.vars.erase(out.vars.begin() + static_cast<std::ptrdiff_t>(pos));
  out.vals.resize(std::size_t{1} << out.vars.size());
  const std::size_t low_mask = (std::size_t{1} << pos) - 1;
  for (std::size_t idx = 0; idx < out.vals.size(); ++idx) {
    std::size_t base = (idx & low_mask) | ((idx & ~low_mask) << 1);
    out.vals[idx] = f.vals[base] + f.vals[base | (std::size_t{1} << pos)];
  }
  return out;
}

Factor restrict_to(const Factor& f, int var, int value) {
  auto it = std::find(f.vars.begin(), f.vars.end(), var);
  if (it == f.vars.end()) return f;
  const std::size_t pos = static_cast<std::size_t>(it - f.vars.begin());
  Factor out;
  out.vars = f.vars;
  out.vars.erase(out.vars.begin() + static_cast<std::ptrdiff_t>(pos));
  out.vals.resize(std::size_t{1} << out.vars.size());
  const std::size_t low_mask = (std::size_t{1} << pos) - 1;
  for (std::size_t idx = 0; idx < out.vals.size(); ++idx) {
    std::size_t base = (idx & low_mask) | ((idx & ~low_mask) << 1);
    out.vals[idx] = f.vals[value ? base | (std::size_t{1} << pos) : base];
  }
  return out;
}

// Index-based view of a validated network plus evidence.
struct Model {
  std::vector<NodeId> ids;
  std::map<NodeId, int> index;
  std::vector<std::vector<int>> parents;
  std::vector<int> hard;  // -1 none, 0/1 state
  std::vector<const Likelihood*> soft;
};

void require_valid(const Network& net) {
  auto report = validate_network(net);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw Error(ErrorKind::InvalidNetwork,
                std::string(to_string(v.kind)) + " at '" + v.node + "': " + v.detail);
  }
}

Model build_model(const Network& net, const EvidenceSet& ev) {
  Model m;
  m.ids = net.nodes;
  for (std::size_t i = 0; i < m.ids.size(); ++i) m.index[m.ids[i]] = static_cast<int>(i);
  m.parents.resize(m.ids.size());
  for (std::size_t i = 0; i < m.ids.size(); ++i) {
    for (const auto& p : net.parents_of(m.ids[i])) m.parents[i].push_back(m.index.at(p));
  }
  m.hard.assign(m.ids.size(), -1);
  m.soft.assign(m.ids.size(), nullptr);
  for (const auto& [node, state] : ev.hard()) {
    auto it = m.index.find(node);
    if (it == m.index.end()) throw Error(ErrorKind::UnknownNode, "evidence on unknown node '" + node + "'");
    m.hard[static_cast<std::size_t>(it->second)] = state == State::Implied ? 1 : 0;
  }
  for (const auto& [node, lik] : ev.soft()) {
    auto it = m.index.find(node);
    if (it == m.index.end()) throw Error(ErrorKind::UnknownNode, "evidence on unknown node '" + node + "'");
    m.soft[static_cast<std::size_t>(it->second)] = &lik;
  }
  return m;
}

double row_value(const CptTable& t, std::size_t mask, int state) {
  double p = std::clamp(t.p_implied[mask], 0.0, 1.0);
  return state ? p : 1.0 - p;
}

Factor cpt_factor(const Network& net, const Model& m, int node) {
  const auto& ps = m.parents[static_cast<std::size_t>(node)];
  const auto& table = net.cpt.at(m.ids[static_cast<std::size_t>(node)]);
  // scope position of node and each parent after sorting
  std::vector<int> scope = ps;
  scope.push_back(node);
  std::sort(scope.begin(), scope.end());
  Factor f;
  f.vars = scope;
  f.vals.resize(std::size_t{1} << scope.size());
  auto bit_of = [&](int var) {
    return std::size_t{1} << static_cast<std::size_t>(std::lower_bound(scope.begin(), scope.end(), var) - scope.begin());
  };
  const std::size_t self_bit = bit_of(node);
  std::vector<std::size_t> parent_bits;
  for (int p : ps) parent_bits.push_back(bit_of(p));
  for (std::size_t idx = 0; idx < f.vals.size(); ++idx) {
    std::size_t row = 0;
    for (std::size_t j = 0; j < parent_bits.size(); ++j)
      if (idx & parent_bits[j]) row |= std::size_t{1} << j;
    f.vals[idx] = row_value(table, row, (idx & self_bit) ? 1 : 0);
  }
  for (int v : scope) {
    int h = m.hard[static_cast<std::size_t>(v)];
    if (h >= 0) f = restrict_to(f, v, h);
  }
  return f;
}

// Bucket elimination over the given factors. `position` maps each variable to
// its slot in the elimination order; INT_MAX marks a variable to keep.
// Returns the product of whatever remains (a factor over kept variables).
Factor eliminate(std::vector<Factor> factors, const std::vector<int>& position, std::size_t slots) {
  std::vector<std::vector<Factor>> buckets(slots);
  std::vector<Factor> rest;
  auto place = [&](Factor f) {
    int best = INT_MAX;
    for (int v : f.vars) best = std::min(best, position[static_cast<std::size_t>(v)]);
    if (best == INT_MAX) {
      rest.push_back(std::move(f));
    } else {
      buckets[static_cast<std::size_t>(best)].push_back(std::move(f));
    }
  };
  for (auto& f : factors) place(std::move(f));
  for (std::size_t slot = 0; slot < slots; ++slot) {
    auto& bucket = buckets[slot];
    if (bucket.empty()) continue;
    Factor prod = std::move(bucket.front());
    for (std::size_t i = 1; i < bucket.size(); ++i) prod = multiply(prod, bucket[i]);
    bucket.clear();
    // the bucket variable is the lowest-position variable in every member
    int var = -1;
    for (int v : prod.vars)
      if (position[static_cast<std::size_t>(v)] == static_cast<int>(slot)) var = v;
    place(sum_out(prod, var));
  }
  Factor result{{}, {1.0}};
  for (const auto& f : rest) result = multiply(result, f);
  return result;
}

}  // namespace

std::vector<NodeId> elimination_order(const Network& net, const EvidenceSet& ev) {
  const std::size_t n = net.nodes.size();
  std::map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[net.nodes[i]] = i;
  std::vector<char> active(n, 1);
  for (const auto& [node, state] : ev.hard()) {
    auto it = index.find(node);
    if (it != index.end()) active[it->second] = 0;
  }
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  auto link = [&](std::size_t a, std::size_t b) {
    if (a != b && active[a] && active[b]) adj[a][b] = adj[b][a] = 1;
  };
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> family{i};
    for (const auto& p : net.parents_of(net.nodes[i])) {
      auto it = index.find(p);
      if (it != index.end()) family.push_back(it->second);
    }
    for (std::size_t a = 0; a < family.size(); ++a)
      for (std::size_t b = a + 1; b < family.size(); ++b) link(family[a], family[b]);
  }

  // candidates in lexicographic id order so the first minimum wins ties
  std::vector<std::size_t> lex(n);
  std::iota(lex.begin(), lex.end(), 0);
  std::sort(lex.begin(), lex.end(), [&](std::size_t a, std::size_t b) { return net.nodes[a] < net.nodes[b]; });

  std::vector<NodeId> order;
  std::vector<std::size_t> nbrs;
  std::size_t remaining = static_cast<std::size_t>(std::count(active.begin(), active.end(), 1));
  while (remaining > 0) {
    std::size_t best = n;
    std::size_t best_fill = SIZE_MAX;
    for (std::size_t v : lex) {
      if (!active[v]) continue;
      nbrs.clear();
      for (std::size_t u = 0; u < n; ++u)
        if (adj[v][u]) nbrs.push_back(u);
      std::size_t fill = 0;
      for (std::size_t a = 0; a < nbrs.size() && fill < best_fill; ++a)
        for (std::size_t b = a + 1; b < nbrs.size(); ++b)
          if (!adj[nbrs[a]][nbrs[b]]) ++fill;
      if (fill < best_fill) {
        best_fill = fill;
        best = v;
        if (fill == 0) break;
      }
    }
    nbrs.clear();
    for (std::size_t u = 0; u < n; ++u)
      if (adj[best][u]) nbrs.push_back(u);
    for (std::size_t a = 0; a < nbrs.size(); ++a)
      for (std::size_t b = a + 1; b < nbrs.size(); ++b) adj[nbrs[a]][nbrs[b]] = adj[nbrs[b]][nbrs[a]] = 1;
    for (std::size_t u : nbrs) adj[best][u] = adj[u][best] = 0;
    active[best] = 0;
    order.push_back(net.nodes[best]);
    --remaining;
  }
  return order;
}

BeliefMap posterior_marginals(const Network& net, const EvidenceSet& ev) {
  require_valid(net);
  const Model m = build_model(net, ev);
  const std::size_t n = m.ids.size();

  std::vector<Factor> cpts(n);
  for (std::size_t i = 0; i < n; ++i) cpts[i] = cpt_factor(net, m, static_cast<int>(i));

  const auto order = elimination_order(net, ev);
  std::vector<int> slot_of(n, INT_MAX);
  for (std::size_t s = 0; s < order.size(); ++s) slot_of[static_cast<std::size_t>(m.index.at(order[s]))] = static_cast<int>(s);

  // Nodes outside the ancestral closure of query + evidence sum to one and
  // are dropped from each query.
  std::vector<char> evidence_anc(n, 0);
  std::vector<std::size_t> stack;
  auto close_ancestors = [&](std::vector<char>& mark) {
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      for (int p : m.parents[v]) {
        auto pi = static_cast<std::size_t>(p);
        if (!mark[pi]) {
          mark[pi] = 1;
          stack.push_back(pi);
        }
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (m.hard[i] >= 0 || m.soft[i]) {
      evidence_anc[i] = 1;
      stack.push_back(i);
    }
  }
  close_ancestors(evidence_anc);

  auto query = [&](const std::vector<char>& relevant, std::size_t keep) {
    std::vector<Factor> factors;
    for (std::size_t i = 0; i < n; ++i) {
      if (!relevant[i]) continue;
      factors.push_back(cpts[i]);
      if (m.soft[i]) factors.push_back(Factor{{static_cast<int>(i)}, {m.soft[i]->not_implied, m.soft[i]->implied}});
    }
    std::vector<int> position(n, INT_MAX);
    for (std::size_t i = 0; i < n; ++i)
      if (relevant[i] && i != keep) position[i] = slot_of[i];
    return eliminate(std::move(factors), position, order.size());
  };

  // Probability of the evidence; zero means the findings contradict the model.
  {
    Factor z = query(evidence_anc, n);
    if (!(z.vals[0] > 0.0) || !std::isfinite(z.vals[0])) {
      throw Error(ErrorKind::EvidenceContradiction, "evidence has zero probability under the model");
    }
  }

  BeliefMap beliefs;
  std::vector<char> relevant;
  for (std::size_t q = 0; q < n; ++q) {
    if (m.hard[q] >= 0) {
      beliefs[m.ids[q]] = m.hard[q] ? 1.0 : 0.0;
      continue;
    }
    relevant = evidence_anc;
    if (!relevant[q]) {
      relevant[q] = 1;
      stack.push_back(q);
      close_ancestors(relevant);
    }
    Factor f = query(relevant, q);
    const double total = f.vals[0] + f.vals[1];
    if (!(total > 0.0)) {
      throw Error(ErrorKind::EvidenceContradiction, "evidence has zero probability under the model");
    }
    beliefs[m.ids[q]] = f.vals[1] / total;
  }
  return beliefs;
}

BeliefMap enumerate_marginals(const Network& net, const EvidenceSet& ev) {
  if (net.nodes.size() > kEnumerationLimit) {
    throw Error(ErrorKind::TooLarge, "enumeration is limited to " + std::to_string(kEnumerationLimit) +
                                         " nodes, network has " + std::to_string(net.nodes.size()));
  }
  require_valid(net);
  const Model m = build_model(net, ev);
  const std::size_t n = m.ids.size();
  std::vector<const CptTable*> tables(n);
  for (std::size_t i = 0; i < n; ++i) tables[i] = &net.cpt.at(m.ids[i]);

  std::size_t fixed_mask = 0, fixed_vals = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (m.hard[i] >= 0) {
      fixed_mask |= std::size_t{1} << i;
      if (m.hard[i]) fixed_vals |= std::size_t{1} << i;
    }
  }

  double total = 0.0;
  std::vector<double> implied_mass(n, 0.0);
  for (std::size_t joint = 0; joint < (std::size_t{1} << n); ++joint) {
    if ((joint & fixed_mask) != fixed_vals) continue;
    double w = 1.0;
    for (std::size_t i = 0; i < n && w != 0.0; ++i) {
      std::size_t row = 0;
      for (std::size_t j = 0; j < m.parents[i].size(); ++j)
        if ((joint >> m.parents[i][j]) & 1) row |= std::size_t{1} << j;
      const int state = static_cast<int>((joint >> i) & 1);
      w *= row_value(*tables[i], row, state);
      if (m.soft[i]) w *= state ? m.soft[i]->implied : m.soft[i]->not_implied;
    }
    total += w;
    for (std::size_t i = 0; i < n; ++i)
      if ((joint >> i) & 1) implied_mass[i] += w;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorKind::EvidenceContradiction, "evidence has zero probability under the model");
  }
  BeliefMap beliefs;
  for (std::size_t i = 0; i < n; ++i) {
    beliefs[m.ids[i]] = m.hard[i] >= 0 ? (m.hard[i] ? 1.0 : 0.0) : implied_mass[i] / total;
  }
  return beliefs;
}

}  // namespace srw
