#include <doctest.h>

#include <cmath>

#include "codetect/error.hpp"
#include "codetect/inference.hpp"
#include "codetect/io.hpp"
#include "codetect/rng.hpp"

using namespace codetect;

namespace {

Vertex vertex(std::vector<double> unary, const std::string& cls = "cup") {
  static int next = 0;
  return Vertex{"i" + std::to_string(next++), "v", cls, std::move(unary)};
}

Edge edge(std::size_t v, std::size_t u, std::vector<double> table, EdgeKind kind = EdgeKind::Class) {
  return Edge{kind, v, u, std::move(table), kind == EdgeKind::Predicate ? "near" : ""};
}

CodetectionGraph worked_example() {
  CodetectionGraph g;
  g.vertices = {vertex({0, -1}), vertex({-2, 0})};
  g.edges = {edge(0, 1, {0, -3, -3, 0})};
  return g;
}

std::vector<double> random_table(Rng& rng, std::size_t n) {
  std::vector<double> t(n);
  for (auto& x : t) x = -rng.uniform(0.0, 5.0);
  return t;
}

// Random graph over `n` vertices with `labels` labels each; edges from the
// given list.
CodetectionGraph random_graph(Rng& rng, std::size_t n, std::size_t labels,
                              const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  CodetectionGraph g;
  for (std::size_t v = 0; v < n; ++v) g.vertices.push_back(vertex(random_table(rng, labels)));
  for (const auto& [v, u] : pairs) g.edges.push_back(edge(v, u, random_table(rng, labels * labels)));
  return g;
}

semparse::PredicateConjunction conj(std::vector<semparse::ObjectInstance> inst, std::vector<semparse::Atom> atoms) {
  return {std::move(inst), std::move(atoms), ""};
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("objective of the worked example") {
    const auto g = worked_example();
    CHECK(objective_score(g, {0, 0}) == -2);
    CHECK(objective_score(g, {0, 1}) == -3);
    CHECK(objective_score(g, {1, 0}) == -6);
    CHECK(objective_score(g, {1, 1}) == -1);
    CHECK_THROWS_AS(objective_score(g, {0}), Error);
    CHECK_THROWS_AS(objective_score(g, {0, 2}), Error);

    const auto bf = brute_force_map(g);
    CHECK(bf.labels == std::vector<std::size_t>{1, 1});
    CHECK(bf.objective == -1);
    const auto bp = max_sum_bp(g);
    CHECK(bp.labels == std::vector<std::size_t>{1, 1});
    CHECK(bp.objective == -1);
  }

  TEST_CASE("unary-only graphs are separable") {
    CodetectionGraph g;
    g.vertices = {vertex({-3, -1, -2}), vertex({0, -1}), vertex({-1, -1})};
    CHECK(objective_score(g, {0, 0, 0}) == -4);
    const auto bf = brute_force_map(g);
    CHECK(bf.labels == std::vector<std::size_t>{1, 0, 0});
    const auto bp = max_sum_bp(g);
    CHECK(bp.labels == bf.labels);
    CHECK(bp.iterations <= 1);
  }

  TEST_CASE("brute force ties and guards") {
    CodetectionGraph g;
    g.vertices = {vertex({0, 0}), vertex({0, 0})};
    g.edges = {edge(0, 1, {-1, 0, 0, -1})};
    // (0,1) and (1,0) tie; the lexicographically smaller wins.
    CHECK(brute_force_map(g).labels == std::vector<std::size_t>{0, 1});

    CodetectionGraph big;
    for (int i = 0; i < 8; ++i) big.vertices.push_back(vertex(std::vector<double>(10, 0.0)));
    for (std::size_t i = 0; i + 1 < 8; ++i) big.edges.push_back(edge(i, i + 1, std::vector<double>(100, 0.0)));
    CHECK_THROWS_AS(brute_force_map(big), Error);
    try {
      brute_force_map(big);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooLarge);
    }

    CodetectionGraph dead;
    dead.vertices = {vertex({0, 0}), vertex({0, 0})};
    dead.edges = {edge(0, 1, std::vector<double>(4, kNegInf))};
    try {
      brute_force_map(dead);
      FAIL("expected Infeasible");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Infeasible);
    }
    CHECK_THROWS_AS(max_sum_bp(dead), Error);
  }

  TEST_CASE("negative infinity entries") {
    CodetectionGraph g;
    g.vertices = {vertex({0, -0.5}), vertex({0, -0.5})};
    // The otherwise best pair (0,0) is forbidden.
    g.edges = {edge(0, 1, {kNegInf, 0, 0, -3})};
    CHECK(std::isinf(objective_score(g, {0, 0})));
    const auto bf = brute_force_map(g);
    CHECK(bf.labels == std::vector<std::size_t>{0, 1});
    const auto bp = max_sum_bp(g);
    CHECK(std::isfinite(bp.objective));
    CHECK(bp.objective == bf.objective);
  }

  TEST_CASE("chains match the exact oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const auto g = random_graph(rng, 3, 3, {{0, 1}, {1, 2}});
      const auto bf = brute_force_map(g);
      const auto bp = max_sum_bp(g);
      CHECK(bp.labels == bf.labels);
      CHECK(bp.objective == doctest::Approx(bf.objective));
    }
  }

  TEST_CASE("loopy graphs never beat the oracle") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      const auto g = random_graph(rng, 4, 3, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}});
      CHECK(max_sum_bp(g).objective <= brute_force_map(g).objective + 1e-12);
    }
  }

  TEST_CASE("components are solved independently") {
    Rng rng(9);
    const auto g = random_graph(rng, 5, 3, {{0, 2}, {3, 4}});
    const auto comps = g.components();
    REQUIRE(comps.size() == 3);
    CHECK(comps[0] == std::vector<std::size_t>{0, 2});
    CHECK(comps[1] == std::vector<std::size_t>{1});
    CHECK(comps[2] == std::vector<std::size_t>{3, 4});
    CHECK(max_sum_bp(g).labels == brute_force_map(g).labels);
  }

  TEST_CASE("unary shift and determinism") {
    Rng rng(10);
    auto g = random_graph(rng, 4, 4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    const auto a = max_sum_bp(g);
    const auto b = max_sum_bp(g);
    CHECK(a.labels == b.labels);
    CHECK(a.objective == b.objective);
    CHECK(a.iterations == b.iterations);

    const auto before = brute_force_map(g);
    const auto original = g;
    for (auto& x : g.vertices[2].unary) x -= 2.5;
    const auto after = brute_force_map(g);
    CHECK(after.labels == before.labels);
    CHECK(after.objective == doctest::Approx(before.objective - 2.5));
    CHECK(objective_score(g, {0, 1, 2, 3}) == doctest::Approx(objective_score(original, {0, 1, 2, 3}) - 2.5));
  }

  TEST_CASE("graph validation") {
    auto g = worked_example();
    g.edges[0].table.pop_back();
    CHECK_THROWS_AS(g.validate(), Error);
    g = worked_example();
    g.edges.push_back(g.edges[0]);
    CHECK_THROWS_AS(g.validate(), Error);
    g = worked_example();
    g.vertices[0].unary[0] = std::nan("");
    CHECK_THROWS_AS(g.validate(), Error);
    g = worked_example();
    g.edges[0].u = 0;
    CHECK_THROWS_AS(g.validate(), Error);
    CHECK_THROWS_AS(max_sum_bp(worked_example(), BPConfig{100, 1.0, 1e-6}), Error);
    CHECK_THROWS_AS(max_sum_bp(worked_example(), BPConfig{0, 0.5, 1e-6}), Error);
  }

  TEST_CASE("variants") {
    CHECK(all_variants().size() == 5);
    for (auto v : all_variants()) CHECK(variant_from_string(to_string(v)) == v);
    CHECK(uses_similarity(Variant::SimSent));
    CHECK_FALSE(uses_similarity(Variant::Sent));
    CHECK_THROWS_AS(variant_from_string("both"), Error);
  }

  TEST_CASE("graph construction") {
    const std::size_t K = 2;
    VideoScores a;
    a.k = K;
    a.med_flow = {-1, -2};
    a.temp_coher = {-3, -4};
    a.unary["moveUp"] = {-0.5, -0.25};
    a.binary["nearEnd"] = {0, -1, -2, -3};
    VideoScores b = a;

    // The mouthwash sentence in one video, another cabbage elsewhere.
    const std::vector<GraphInput> inputs{
        {"a", conj({{"m", "mouthwash"}, {"c", "cabbage"}}, {{"moveUp", {"m"}}, {"nearEnd", {"m", "c"}}})},
        {"b", conj({{"c", "cabbage"}}, {{"moveUp", {"c"}}})}};
    const std::map<std::string, VideoScores> scores{{"a", a}, {"b", b}};
    SimilarityMatrix sim;
    sim.insert("a", "b", SimilarityTable(K, K, {-0.1, -0.2, -0.3, -0.4}));

    const auto ss = build_graph("s", inputs, scores, &sim, Variant::SimSent);
    REQUIRE(ss.vertices.size() == 3);
    CHECK(ss.vertices[0].instance_id == "m");
    CHECK(ss.vertices[2].video_id == "b");
    CHECK(ss.vertices[0].unary == std::vector<double>{-0.5, -0.25});
    REQUIRE(ss.edges.size() == 2);
    CHECK(ss.edges[0].kind == EdgeKind::Predicate);
    CHECK(ss.edges[0].v == 0);
    CHECK(ss.edges[0].u == 1);
    CHECK(ss.edges[0].table == std::vector<double>{0, -1, -2, -3});
    CHECK(ss.edges[1].kind == EdgeKind::Class);
    CHECK(ss.edges[1].v == 1);
    CHECK(ss.edges[1].u == 2);

    const auto sent = build_graph("s", inputs, scores, nullptr, Variant::Sent);
    CHECK(sent.edges.size() == 1);

    const auto sim_only = build_graph("s", inputs, scores, &sim, Variant::Sim);
    CHECK(sim_only.edges.size() == 1);
    CHECK(sim_only.vertices[0].unary == std::vector<double>{0, 0});

    // FLOW: the mover gets medFlMg, the reference gets tempCoher.
    const auto flow = build_graph("s", inputs, scores, nullptr, Variant::Flow);
    CHECK(flow.edges.empty());
    CHECK(flow.vertices[0].unary == std::vector<double>{-1, -2});
    CHECK(flow.vertices[1].unary == std::vector<double>{-3, -4});
    CHECK(flow.vertices[2].unary == std::vector<double>{-1, -2});

    CHECK_THROWS_AS(build_graph("s", inputs, scores, nullptr, Variant::SimSent), Error);
    auto missing = scores;
    missing["a"].binary.clear();
    try {
      build_graph("s", inputs, missing, nullptr, Variant::Sent);
      FAIL("expected MissingScore");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingScore);
    }
  }

  TEST_CASE("reversed atoms and shared pairs") {
    VideoScores s;
    s.k = 2;
    s.binary["leftOfEnd"] = {0, -1, -2, -3};
    s.binary["nearEnd"] = {-10, 0, -5, 0};
    const std::vector<GraphInput> inputs{
        {"a", conj({{"x", "cup"}, {"y", "bowl"}}, {{"leftOfEnd", {"y", "x"}}, {"nearEnd", {"x", "y"}}})}};
    const auto g = build_graph("s", inputs, {{"a", s}}, nullptr, Variant::Sent);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].predicate == "leftOfEnd&nearEnd");
    // The first atom fixes the orientation (rows are y); nearEnd(x, y) enters
    // transposed.
    CHECK(g.edges[0].v == 1);
    CHECK(g.edges[0].u == 0);
    CHECK(g.edges[0].table == std::vector<double>{-10, -6, -2, -3});
  }

  TEST_CASE("similarity pairs") {
    const std::vector<GraphInput> inputs{{"a", conj({{"x", "cup"}, {"y", "cup"}}, {})},
                                         {"b", conj({{"z", "bowl"}}, {})},
                                         {"c", conj({{"w", "cup"}}, {})}};
    using P = SimilarityMatrix::VideoPair;
    CHECK(similarity_pairs(inputs) == std::vector<P>{{"a", "a"}, {"a", "c"}});
  }

  TEST_CASE("graph json round trip") {
    auto g = worked_example();
    g.set_id = "s";
    g.edges[0].table[1] = kNegInf;
    const auto back = io::graph_from_json(io::graph_to_json(g));
    CHECK(back.set_id == "s");
    REQUIRE(back.vertices.size() == 2);
    CHECK(back.vertices[1].unary == g.vertices[1].unary);
    CHECK(back.vertices[0].instance_id == g.vertices[0].instance_id);
    REQUIRE(back.edges.size() == 1);
    CHECK(back.edges[0].kind == EdgeKind::Class);
    CHECK(std::isinf(back.edges[0].table[1]));
    CHECK(max_sum_bp(back).labels == max_sum_bp(g).labels);
  }
}
