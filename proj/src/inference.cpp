#include "codetect/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "codetect/predicates.hpp"

namespace codetect {

namespace {

bool is_neg_inf(double x) { return std::isinf(x) && x < 0; }

std::size_t cols_of(const CodetectionGraph& g, const Edge& e) { return g.vertices[e.u].labels(); }

// Local view of one connected component.
struct Component {
  std::vector<std::size_t> vertices;  // global ids, ascending
  std::vector<std::size_t> edges;     // global edge ids
};

std::vector<Component> split(const CodetectionGraph& g) {
  std::vector<Component> out;
  std::vector<std::size_t> owner(g.vertices.size());
  for (const auto& members : g.components()) {
    for (auto v : members) owner[v] = out.size();
    out.push_back({members, {}});
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) out[owner[g.edges[e].v]].edges.push_back(e);
  return out;
}

double local_score(const CodetectionGraph& g, const Component& c, const std::vector<std::size_t>& labels) {
  double s = 0.0;
  for (auto v : c.vertices) s += g.vertices[v].unary[labels[v]];
  for (auto e : c.edges) {
    const auto& edge = g.edges[e];
    s += edge.at(labels[edge.v], labels[edge.u], cols_of(g, edge));
  }
  return s;
}

std::size_t argmax_smallest(const std::vector<double>& xs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[best]) best = i;
  }
  return best;
}

void normalize(std::vector<double>& m) {
  double top = kNegInf;
  for (double x : m) {
    if (!is_neg_inf(x)) top = std::max(top, x);
  }
  if (is_neg_inf(top)) return;
  for (double& x : m) x -= top;
}

// Max-sum on one component; writes the decoded labels into `labels`.
std::pair<int, bool> bp_component(const CodetectionGraph& g, const Component& c, const BPConfig& cfg,
                                  std::vector<std::size_t>& labels) {
  if (c.edges.empty()) {
    for (auto v : c.vertices) labels[v] = argmax_smallest(g.vertices[v].unary);
    return {0, true};
  }
  // to_u[i]: message along edge i into its u end; to_v[i]: into its v end.
  const std::size_t E = c.edges.size();
  std::vector<std::vector<double>> to_u(E), to_v(E);
  std::map<std::size_t, std::vector<std::pair<std::size_t, bool>>> incident;  // vertex -> (edge, is_v_end)
  for (std::size_t i = 0; i < E; ++i) {
    const auto& e = g.edges[c.edges[i]];
    to_u[i].assign(g.vertices[e.u].labels(), 0.0);
    to_v[i].assign(g.vertices[e.v].labels(), 0.0);
    incident[e.v].push_back({i, true});
    incident[e.u].push_back({i, false});
  }

  // Unary plus every incoming message except the one along `skip`.
  auto cavity = [&](std::size_t vertex, std::size_t skip) {
    std::vector<double> out = g.vertices[vertex].unary;
    for (const auto& [i, at_v] : incident[vertex]) {
      if (i == skip) continue;
      const auto& msg = at_v ? to_v[i] : to_u[i];
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += msg[k];
    }
    return out;
  };

  auto damp = [&](std::vector<double>& old, std::vector<double>& fresh) {
    double delta = 0.0;
    for (std::size_t k = 0; k < old.size(); ++k) {
      double next;
      if (is_neg_inf(old[k]) || is_neg_inf(fresh[k])) {
        next = kNegInf;
      } else {
        next = cfg.damping * old[k] + (1.0 - cfg.damping) * fresh[k];
      }
      if (is_neg_inf(next) != is_neg_inf(old[k])) {
        delta = std::numeric_limits<double>::infinity();
      } else if (!is_neg_inf(next)) {
        delta = std::max(delta, std::abs(next - old[k]));
      }
      old[k] = next;
    }
    return delta;
  };

  int iter = 0;
  bool converged = false;
  while (iter < cfg.max_iters) {
    ++iter;
    std::vector<std::vector<double>> new_u(E), new_v(E);
    for (std::size_t i = 0; i < E; ++i) {
      const auto& e = g.edges[c.edges[i]];
      const std::size_t kv = g.vertices[e.v].labels(), ku = g.vertices[e.u].labels();
      const auto from_v = cavity(e.v, i);
      const auto from_u = cavity(e.u, i);
      new_u[i].assign(ku, kNegInf);
      new_v[i].assign(kv, kNegInf);
      for (std::size_t a = 0; a < kv; ++a) {
        for (std::size_t b = 0; b < ku; ++b) {
          const double t = e.table[a * ku + b];
          new_u[i][b] = std::max(new_u[i][b], from_v[a] + t);
          new_v[i][a] = std::max(new_v[i][a], from_u[b] + t);
        }
      }
      normalize(new_u[i]);
      normalize(new_v[i]);
    }
    double delta = 0.0;
    for (std::size_t i = 0; i < E; ++i) {
      delta = std::max(delta, damp(to_u[i], new_u[i]));
      delta = std::max(delta, damp(to_v[i], new_v[i]));
    }
    if (delta < cfg.tol) {
      converged = true;
      break;
    }
  }
  for (auto v : c.vertices) labels[v] = argmax_smallest(cavity(v, E));
  return {iter, converged};
}

}  // namespace

std::string_view to_string(EdgeKind k) { return k == EdgeKind::Class ? "class" : "predicate"; }

void CodetectionGraph::validate() const {
  auto bad = [](double x) { return std::isnan(x) || (std::isinf(x) && x > 0); };
  for (const auto& v : vertices) {
    if (v.unary.empty()) throw Error(ErrorCode::InvalidArgument, "vertex '" + v.instance_id + "' has no labels");
    if (std::any_of(v.unary.begin(), v.unary.end(), bad)) {
      throw Error(ErrorCode::InvalidArgument, "vertex '" + v.instance_id + "' has a NaN or +inf score");
    }
  }
  std::set<std::tuple<int, std::size_t, std::size_t>> seen;
  for (const auto& e : edges) {
    if (e.v >= vertices.size() || e.u >= vertices.size() || e.v == e.u) {
      throw Error(ErrorCode::InvalidArgument, "edge endpoints invalid");
    }
    if (e.table.size() != vertices[e.v].labels() * vertices[e.u].labels()) {
      throw Error(ErrorCode::DimMismatch, "edge table does not match endpoint label counts");
    }
    if (std::any_of(e.table.begin(), e.table.end(), bad)) {
      throw Error(ErrorCode::InvalidArgument, "edge table has a NaN or +inf score");
    }
    if (!seen.insert({static_cast<int>(e.kind), std::min(e.v, e.u), std::max(e.v, e.u)}).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate edge of the same kind");
    }
  }
}

std::vector<std::vector<std::size_t>> CodetectionGraph::components() const {
  std::vector<std::size_t> parent(vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges) {
    const auto a = find(e.v), b = find(e.u);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t v = 0; v < vertices.size(); ++v) groups[find(v)].push_back(v);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

void BPConfig::validate() const {
  if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "BP needs at least one iteration");
  if (!(damping >= 0.0 && damping < 1.0)) throw Error(ErrorCode::InvalidArgument, "damping must lie in [0, 1)");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "BP tolerance must be positive");
}

double objective_score(const CodetectionGraph& g, const std::vector<std::size_t>& labels) {
  if (labels.size() != g.vertices.size()) throw Error(ErrorCode::InvalidArgument, "assignment is incomplete");
  double s = 0.0;
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    if (labels[v] >= g.vertices[v].labels()) throw Error(ErrorCode::InvalidArgument, "label out of range");
    s += g.vertices[v].unary[labels[v]];
  }
  for (const auto& e : g.edges) s += e.at(labels[e.v], labels[e.u], cols_of(g, e));
  return s;
}

Assignment brute_force_map(const CodetectionGraph& g, double guard) {
  g.validate();
  Assignment out;
  out.labels.assign(g.vertices.size(), 0);
  for (const auto& c : split(g)) {
    double space = 1.0;
    for (auto v : c.vertices) space *= static_cast<double>(g.vertices[v].labels());
    if (space > guard) throw Error(ErrorCode::TooLarge, "search space exceeds the brute-force guard");
    std::vector<std::size_t> cur = out.labels;
    for (auto v : c.vertices) cur[v] = 0;
    std::vector<std::size_t> best = cur;
    double best_score = kNegInf;
    bool any = false;
    while (true) {
      const double s = local_score(g, c, cur);
      if (!is_neg_inf(s) && (!any || s > best_score)) {
        best_score = s;
        best = cur;
        any = true;
      }
      // Odometer with the last vertex fastest, so visiting order is lexicographic.
      std::size_t i = c.vertices.size();
      while (i > 0) {
        const auto v = c.vertices[i - 1];
        if (++cur[v] < g.vertices[v].labels()) break;
        cur[v] = 0;
        --i;
      }
      if (i == 0) break;
    }
    if (!any) throw Error(ErrorCode::Infeasible, "every assignment scores -inf");
    for (auto v : c.vertices) out.labels[v] = best[v];
  }
  out.objective = objective_score(g, out.labels);
  return out;
}

Assignment max_sum_bp(const CodetectionGraph& g, const BPConfig& config) {
  config.validate();
  g.validate();
  Assignment out;
  out.labels.assign(g.vertices.size(), 0);
  for (const auto& c : split(g)) {
    const auto [iters, conv] = bp_component(g, c, config, out.labels);
    out.iterations = std::max(out.iterations, iters);
    out.converged = out.converged && conv;
  }
  out.objective = objective_score(g, out.labels);
  if (is_neg_inf(out.objective)) {
    // Try moving one vertex at a time; keep the best finite result.
    std::vector<std::size_t> best;
    double best_score = kNegInf;
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
      auto trial = out.labels;
      for (std::size_t k = 0; k < g.vertices[v].labels(); ++k) {
        trial[v] = k;
        const double s = objective_score(g, trial);
        if (s > best_score) {
          best_score = s;
          best = trial;
        }
      }
    }
    if (is_neg_inf(best_score)) throw Error(ErrorCode::Infeasible, "decoded assignment has no finite repair");
    out.labels = best;
    out.objective = best_score;
  }
  return out;
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Sim: return "sim";
    case Variant::Flow: return "flow";
    case Variant::Sent: return "sent";
    case Variant::SimFlow: return "sim-flow";
    case Variant::SimSent: return "sim-sent";
  }
  return "?";
}

Variant variant_from_string(std::string_view s) {
  for (auto v : all_variants()) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown variant '" + std::string(s) + "'");
}

std::vector<Variant> all_variants() {
  return {Variant::Sim, Variant::Flow, Variant::Sent, Variant::SimFlow, Variant::SimSent};
}

bool uses_similarity(Variant v) {
  return v == Variant::Sim || v == Variant::SimFlow || v == Variant::SimSent;
}

std::vector<SimilarityMatrix::VideoPair> similarity_pairs(const std::vector<GraphInput>& inputs) {
  struct Ref {
    std::size_t input;
    std::string class_noun;
  };
  std::vector<Ref> refs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (const auto& inst : inputs[i].conjunction.instances) refs.push_back({i, inst.class_noun});
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<SimilarityMatrix::VideoPair> out;
  for (std::size_t a = 0; a < refs.size(); ++a) {
    for (std::size_t b = a + 1; b < refs.size(); ++b) {
      if (refs[a].class_noun != refs[b].class_noun) continue;
      const auto key = std::minmax(refs[a].input, refs[b].input);
      if (seen.insert(key).second) {
        out.push_back({inputs[key.first].video_id, inputs[key.second].video_id});
      }
    }
  }
  return out;
}

namespace {

const std::vector<double>& need(const std::map<std::string, std::vector<double>>& tables, const std::string& name,
                                std::size_t size, const std::string& video) {
  auto it = tables.find(name);
  if (it == tables.end() || it->second.size() != size) {
    throw Error(ErrorCode::MissingScore, "no '" + name + "' table for video '" + video + "'");
  }
  return it->second;
}

void add_into(std::vector<double>& dst, const std::vector<double>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

CodetectionGraph build_graph(const std::string& set_id, const std::vector<GraphInput>& inputs,
                             const std::map<std::string, VideoScores>& scores,
                             const SimilarityMatrix* similarity, Variant variant) {
  CodetectionGraph g;
  g.set_id = set_id;
  const bool sent = variant == Variant::Sent || variant == Variant::SimSent;
  const bool flow = variant == Variant::Flow || variant == Variant::SimFlow;

  for (const auto& in : inputs) {
    auto sit = scores.find(in.video_id);
    if (sit == scores.end() || sit->second.k == 0) {
      throw Error(ErrorCode::MissingScore, "no proposal scores for video '" + in.video_id + "'");
    }
    const VideoScores& vs = sit->second;
    const std::size_t K = vs.k;
    const std::size_t base = g.vertices.size();
    std::map<std::string, std::size_t> index;
    for (const auto& inst : in.conjunction.instances) {
      index[inst.id] = g.vertices.size();
      g.vertices.push_back({inst.id, in.video_id, inst.class_noun, std::vector<double>(K, 0.0)});
    }
    auto vertex_of = [&](const std::string& id) {
      auto it = index.find(id);
      if (it == index.end()) throw Error(ErrorCode::InvalidArgument, "atom argument '" + id + "' is not an instance");
      return it->second;
    };

    if (flow) {
      std::vector<bool> moving(g.vertices.size() - base, false), still(g.vertices.size() - base, false);
      for (const auto& atom : in.conjunction.atoms) {
        if (predicate_implies_moving(atom.predicate)) moving[vertex_of(atom.args.at(0)) - base] = true;
        if (predicate_implies_stationary_reference(atom.predicate)) still[vertex_of(atom.args.at(1)) - base] = true;
      }
      for (std::size_t i = 0; i < moving.size(); ++i) {
        if (moving[i]) {
          if (vs.med_flow.size() != K) throw Error(ErrorCode::MissingScore, "no flow scores for '" + in.video_id + "'");
          add_into(g.vertices[base + i].unary, vs.med_flow);
        }
        if (still[i]) {
          if (vs.temp_coher.size() != K) {
            throw Error(ErrorCode::MissingScore, "no temporal coherence for '" + in.video_id + "'");
          }
          add_into(g.vertices[base + i].unary, vs.temp_coher);
        }
      }
    }

    if (sent) {
      // (v, u) with v < u -> edge index; atoms over the same pair share one edge.
      std::map<std::pair<std::size_t, std::size_t>, std::size_t> pedges;
      for (const auto& atom : in.conjunction.atoms) {
        const auto arity = predicate_arity(atom.predicate);
        if (!arity) throw Error(ErrorCode::UnknownPredicate, "unknown predicate '" + atom.predicate + "'");
        if (*arity == 1) {
          add_into(g.vertices[vertex_of(atom.args.at(0))].unary, need(vs.unary, atom.predicate, K, in.video_id));
          continue;
        }
        const auto a = vertex_of(atom.args.at(0)), b = vertex_of(atom.args.at(1));
        const auto& table = need(vs.binary, atom.predicate, K * K, in.video_id);
        if (a == b) {
          for (std::size_t k = 0; k < K; ++k) g.vertices[a].unary[k] += table[k * K + k];
          continue;
        }
        const auto key = std::minmax(a, b);
        auto it = pedges.find(key);
        if (it == pedges.end()) {
          it = pedges.emplace(key, g.edges.size()).first;
          g.edges.push_back({EdgeKind::Predicate, a, b, std::vector<double>(K * K, 0.0), atom.predicate});
        } else {
          g.edges[it->second].predicate += "&" + atom.predicate;
        }
        Edge& e = g.edges[it->second];
        for (std::size_t r = 0; r < K; ++r) {
          for (std::size_t c = 0; c < K; ++c) {
            e.table[r * K + c] += e.v == a ? table[r * K + c] : table[c * K + r];
          }
        }
      }
    }
  }

  if (uses_similarity(variant)) {
    if (!similarity) throw Error(ErrorCode::MissingScore, "similarity variant without similarity scores");
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
      for (std::size_t u = v + 1; u < g.vertices.size(); ++u) {
        if (g.vertices[v].class_noun != g.vertices[u].class_noun) continue;
        SimilarityTable t = similarity->table(g.vertices[v].video_id, g.vertices[u].video_id);
        if (t.rows() != g.vertices[v].labels() || t.cols() != g.vertices[u].labels()) {
          throw Error(ErrorCode::DimMismatch, "similarity table does not match proposal counts");
        }
        g.edges.push_back({EdgeKind::Class, v, u, t.values(), {}});
      }
    }
  }
  g.validate();
  return g;
}

}  // namespace codetect
