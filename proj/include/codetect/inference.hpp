#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codetect/core.hpp"
#include "codetect/semparse.hpp"
#include "codetect/similarity.hpp"

namespace codetect {

struct Vertex {
  std::string instance_id;
  std::string video_id;
  std::string class_noun;
  std::vector<double> unary;  // h_v over proposal indices

  std::size_t labels() const { return unary.size(); }
};

enum class EdgeKind { Class, Predicate };

std::string_view to_string(EdgeKind k);

struct Edge {
  EdgeKind kind = EdgeKind::Class;
  std::size_t v = 0;
  std::size_t u = 0;
  std::vector<double> table;  // row-major, rows are labels of v
  std::string predicate;      // P-edges only; merged atoms are joined by '&'

  double at(std::size_t kv, std::size_t ku, std::size_t cols) const { return table[kv * cols + ku]; }
};

struct CodetectionGraph {
  std::string set_id;
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;

  // Sizes match, no NaN or +inf, no self loops, no duplicate (kind, pair).
  void validate() const;
  // Connected components, each sorted, ordered by smallest vertex.
  std::vector<std::vector<std::size_t>> components() const;
};

struct Assignment {
  std::vector<std::size_t> labels;
  double objective = kNegInf;
  int iterations = 0;
  bool converged = true;
};

struct BPConfig {
  int max_iters = 100;
  double damping = 0.5;
  double tol = 1e-6;

  void validate() const;
};

inline constexpr double kBruteForceGuard = 1e7;

double objective_score(const CodetectionGraph& graph, const std::vector<std::size_t>& labels);

// Exhaustive search per connected component; ties go to the lexicographically
// smallest label vector.
Assignment brute_force_map(const CodetectionGraph& graph, double guard = kBruteForceGuard);

// Synchronous damped max-sum message passing, per connected component.
Assignment max_sum_bp(const CodetectionGraph& graph, const BPConfig& config = {});

enum class Variant { Sim, Flow, Sent, SimFlow, SimSent };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);
std::vector<Variant> all_variants();
bool uses_similarity(Variant v);

// Precomputed predicate tables of one video. Binary tables are K x K with
// rows indexed by the first argument.
struct VideoScores {
  std::size_t k = 0;
  std::vector<double> med_flow;
  std::vector<double> temp_coher;
  std::map<std::string, std::vector<double>> unary;
  std::map<std::string, std::vector<double>> binary;
};

struct GraphInput {
  std::string video_id;
  semparse::PredicateConjunction conjunction;
};

// Vertex order follows the input order, then instance order inside each
// conjunction.
CodetectionGraph build_graph(const std::string& set_id, const std::vector<GraphInput>& inputs,
                             const std::map<std::string, VideoScores>& scores,
                             const SimilarityMatrix* similarity, Variant variant);

// Video pairs whose similarity tables the variant needs (same-class
// instances, same-video pairs included), each pair listed once.
std::vector<SimilarityMatrix::VideoPair> similarity_pairs(const std::vector<GraphInput>& inputs);

}  // namespace codetect
