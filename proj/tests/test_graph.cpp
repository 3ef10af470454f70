#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "graphdist/errors.hpp"
#include "graphdist/graph.hpp"
#include "oracles.hpp"

using namespace graphdist;

namespace {

std::string temp_path(const char* name) {
  return std::string("/tmp/graphdist_test_") + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE_BEGIN("graph");

TEST_CASE("single graph round trip") {
  Corpus corpus;
  corpus.graphs.emplace_back(
      "g0", std::vector<std::string>{"a", "b"},
      std::vector<std::tuple<std::string, std::string, double>>{{"a", "b", 1.0}});
  const std::string path = temp_path("roundtrip.jsonl");
  save_corpus(corpus, path);
  const Corpus loaded = load_corpus(path);
  CHECK(loaded.size() == 1);
  CHECK(loaded.graphs[0].id() == "g0");
  CHECK(loaded.graphs[0].weight(0, 1) == 1.0);
  CHECK(loaded.d_x == 0);
}

TEST_CASE("save/load is bit exact including awkward weights") {
  Rng rng(3);
  Corpus corpus;
  corpus.d_x = 2;
  for (int g = 0; g < 4; ++g) {
    std::vector<std::string> nodes{"a", "b", "c"};
    std::vector<std::tuple<std::string, std::string, double>> edges{
        {"a", "b", rng.uniform()}, {"b", "c", 1.0 / 3.0}};
    std::map<std::string, std::vector<double>> attrs;
    for (const auto& n : nodes) attrs[n] = {rng.uniform(-10, 10), 0.1 + rng.uniform()};
    corpus.graphs.emplace_back("g" + std::to_string(g), nodes, edges, attrs);
  }
  const std::string p1 = temp_path("bitexact1.jsonl");
  const std::string p2 = temp_path("bitexact2.jsonl");
  save_corpus(corpus, p1);
  const Corpus loaded = load_corpus(p1);
  save_corpus(loaded, p2);
  CHECK(slurp(p1) == slurp(p2));
  for (std::size_t g = 0; g < corpus.size(); ++g) {
    CHECK(loaded.graphs[g].weight(0, 1) == corpus.graphs[g].weight(0, 1));
    CHECK(loaded.graphs[g].attribute(1) == corpus.graphs[g].attribute(1));
  }
}

TEST_CASE("asymmetric duplicate edge is rejected with the offending record") {
  const std::string path = temp_path("dup.jsonl");
  {
    std::ofstream out(path);
    out << R"({"id":"g0","nodes":["a","b"],"edges":[["a","b",1.0],["b","a",2.0]]})" << "\n";
  }
  try {
    load_corpus(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("asymmetric duplicate edge") != std::string::npos);
    CHECK(msg.find(":1") != std::string::npos);  // line number of the record
  }
}

TEST_CASE("inconsistent attribute dimensions across graphs are rejected") {
  const std::string path = temp_path("dim.jsonl");
  {
    std::ofstream out(path);
    out << R"({"id":"g0","nodes":["a"],"edges":[],"attrs":{"a":[1,2,3]}})" << "\n";
    out << R"({"id":"g1","nodes":["a"],"edges":[],"attrs":{"a":[1,2,3,4]}})" << "\n";
  }
  CHECK_THROWS_AS(load_corpus(path), DataError);
}

TEST_CASE("parse failures and duplicate ids carry the location") {
  const std::string path = temp_path("bad.jsonl");
  {
    std::ofstream out(path);
    out << "{not json}\n";
  }
  CHECK_THROWS_AS(load_corpus(path), DataError);
  {
    std::ofstream out(path);
    out << R"({"id":"g0","nodes":["a"],"edges":[]})" << "\n";
    out << R"({"id":"g0","nodes":["a"],"edges":[]})" << "\n";
  }
  try {
    load_corpus(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("duplicate graph id") != std::string::npos);
  }
}

TEST_CASE("self loops are rejected") {
  CHECK_THROWS_AS(
      GraphInstance("g", {"a", "b"},
                    std::vector<std::tuple<std::string, std::string, double>>{{"a", "a", 1.0}}),
      DataError);
}

TEST_CASE("synthetic generation is deterministic and respects edge_prob=1") {
  SyntheticSpec spec;
  spec.count = 5;
  spec.size_min = 3;
  spec.size_max = 5;
  spec.edge_prob = 0.5;
  spec.seed = 7;
  const Corpus a = generate_synthetic_corpus(spec);
  const Corpus b = generate_synthetic_corpus(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t g = 0; g < a.size(); ++g) {
    CHECK(a.graphs[g].nodes() == b.graphs[g].nodes());
    CHECK(a.graphs[g].edge_weights() == b.graphs[g].edge_weights());
  }

  spec.edge_prob = 1.0;
  const Corpus complete = generate_synthetic_corpus(spec);
  for (const auto& g : complete.graphs) {
    CHECK(g.edge_count() == g.size() * (g.size() - 1) / 2);
  }
}

TEST_CASE("infeasible connectivity errors out") {
  SyntheticSpec spec;
  spec.count = 1;
  spec.size_min = 2;
  spec.size_max = 2;
  spec.edge_prob = 0.0;
  CHECK_THROWS_AS(generate_synthetic_corpus(spec), DataError);
}

TEST_CASE("split sizes follow 6:2:2 with remainder to train") {
  SyntheticSpec spec;
  spec.count = 10;
  spec.size_min = 3;
  spec.size_max = 4;
  spec.seed = 2;
  const Corpus corpus = generate_synthetic_corpus(spec);
  const SplitAssignment s = split_corpus(corpus, {6, 2, 2}, 1);
  CHECK(s.train_ids.size() == 6);
  CHECK(s.validation_ids.size() == 2);
  CHECK(s.test_ids.size() == 2);

  // partition: union matches ids, pairwise disjoint
  std::set<std::string> all(s.train_ids.begin(), s.train_ids.end());
  all.insert(s.validation_ids.begin(), s.validation_ids.end());
  all.insert(s.test_ids.begin(), s.test_ids.end());
  CHECK(all.size() == corpus.size());

  const SplitAssignment again = split_corpus(corpus, {6, 2, 2}, 1);
  CHECK(again.train_ids == s.train_ids);
  CHECK(again.validation_ids == s.validation_ids);
  CHECK(again.test_ids == s.test_ids);

  const SplitAssignment train_only = split_corpus(corpus, {1, 0, 0}, 1);
  CHECK(train_only.train_ids.size() == corpus.size());

  // 11 graphs at 6:2:2: floors are 6/2/2, remainder goes to train
  SyntheticSpec spec11 = spec;
  spec11.count = 11;
  const Corpus c11 = generate_synthetic_corpus(spec11);
  const SplitAssignment s11 = split_corpus(c11, {6, 2, 2}, 1);
  CHECK(s11.train_ids.size() == 7);
  CHECK(s11.validation_ids.size() == 2);
  CHECK(s11.test_ids.size() == 2);
}

TEST_CASE("tiny corpus with three positive ratios is rejected") {
  SyntheticSpec spec;
  spec.count = 2;
  spec.size_min = 3;
  spec.size_max = 3;
  spec.seed = 5;
  const Corpus corpus = generate_synthetic_corpus(spec);
  CHECK_THROWS_AS(split_corpus(corpus, {6, 2, 2}, 1), DataError);
  CHECK_NOTHROW(split_corpus(corpus, {1, 0, 0}, 1));
}

TEST_CASE("max_graph_size") {
  SyntheticSpec spec;
  spec.count = 3;
  spec.size_min = 3;
  spec.size_max = 5;
  spec.seed = 9;
  const Corpus corpus = generate_synthetic_corpus(spec);
  std::size_t expected = 0;
  for (const auto& g : corpus.graphs) expected = std::max(expected, g.size());
  CHECK(max_graph_size(corpus) == expected);
  CHECK_THROWS_AS(max_graph_size(Corpus{}), DataError);
}

TEST_SUITE_END();
