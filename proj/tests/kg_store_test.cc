/*!
 *  Copyright (c) 2024 by Contributors
 * \file tests/kg_store_test.cc
 */
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kgsparql/kg_store.h"
#include "oracles.h"

using namespace kgsparql;

namespace {

const std::string kNs = "http://rdf.freebase.com/ns/";
const std::string kRay = kNs + "m.05h7f2";

KgStore RayBarone() { return KgStore::Load(oracle::DataFile("ray_barone.nt")); }

/*! Two one-hop relations whose labels overlap the question in 2 of 3 and 1 of 3 tokens. */
KgStore OverlapStore() {
  return KgStore::Parse(
      "<http://ex.org/a> <http://ex.org/birthPlaceCity> <http://ex.org/b> .\n"
      "<http://ex.org/a> <http://ex.org/deathDateYear> <http://ex.org/c> .\n");
}

}  // namespace

TEST_CASE("parse n-triples") {
  KgStore s = KgStore::Parse(
      "<http://ex.org/a> <http://ex.org/p> <http://ex.org/b> .\n"
      "# comment\n"
      "\n"
      "<http://ex.org/b> <http://ex.org/q> \"x y\"@en .\r\n"
      "_:n1 <http://ex.org/p> \"5\"^^<http://www.w3.org/2001/XMLSchema#integer> . # trailing\n");
  CHECK(s.size() == 3);
  CHECK(s.Outgoing("http://ex.org/a").size() == 1);
  CHECK(s.Outgoing("http://ex.org/b").size() == 1);
  CHECK(s.Incoming("http://ex.org/b").size() == 1);
  CHECK(s.Incoming("\"x y\"@en").size() == 1);
  CHECK(s.Outgoing("_:n1").size() == 1);
  CHECK(s.Incoming("\"5\"^^<http://www.w3.org/2001/XMLSchema#integer>").size() == 1);
  CHECK(s.Outgoing("http://ex.org/zzz").empty());
  CHECK(s.Contains("http://ex.org/a"));
  CHECK_FALSE(s.Contains("http://ex.org/zzz"));
  CHECK(IsLiteralNode("\"x y\"@en"));
  CHECK_FALSE(IsLiteralNode("http://ex.org/a"));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const KgTriple& t = s.triples()[i];
    const auto& out = s.Outgoing(t.subject);
    const auto& in = s.Incoming(t.object);
    CHECK(std::find(out.begin(), out.end(), i) != out.end());
    CHECK(std::find(in.begin(), in.end(), i) != in.end());
  }
}

TEST_CASE("parse errors carry line numbers") {
  const char* bad[] = {
      "<http://ex.org/a> <http://ex.org/p> <http://ex.org/b> .\n<http://ex.org/a> <http://ex.org/p> .\n",
      "<http://ex.org/a> <http://ex.org/p> <http://ex.org/b> .\n<http://ex.org/a> <http://ex.org/p> <http://ex.org/b>\n",
      "<http://ex.org/a> <http://ex.org/p> <http://ex.org/b> .\n\"lit\" <http://ex.org/p> <http://ex.org/b> .\n",
      "<http://ex.org/a> <http://ex.org/p> <http://ex.org/b> .\n<http://ex.org/a> <http://ex.org/p> \"open .\n",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    try {
      KgStore::Parse(text);
      FAIL("malformed line accepted");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  CHECK_THROWS_AS(KgStore::Load("/nonexistent/store.nt"), IoError);
}

TEST_CASE("duplicate triples collapse") {
  std::string line = "<http://ex.org/a> <http://ex.org/p> <http://ex.org/b> .\n";
  KgStore s = KgStore::Parse(line + line + line);
  CHECK(s.size() == 1);
  CHECK(s.Outgoing("http://ex.org/a").size() == 1);
}

TEST_CASE("label tokens and relevance") {
  CHECK(RelationLocalName(kNs + "tv.regular_tv_appearance.actor") == "tv.regular_tv_appearance.actor");
  CHECK(RelationLocalName("http://ex.org/x#birthPlace") == "birthPlace");
  CHECK(LabelTokens(kNs + "tv.regular_tv_appearance.actor") ==
        std::set<std::string>{"tv", "regular", "appearance", "actor"});
  CHECK(LabelTokens("http://dbpedia.org/ontology/foundedBy") == std::set<std::string>{"founded", "by"});
  CHECK(QuestionTerms("Who played Ray Barone, in 2001?") ==
        std::set<std::string>{"who", "played", "ray", "barone", "in", "2001"});
  std::set<std::string> q = QuestionTerms("birth place of Ada, and year?");
  CHECK(RelationRelevance("http://ex.org/birthPlaceCity", q) == doctest::Approx(2.01 / 3.01));
  CHECK(RelationRelevance("http://ex.org/deathDateYear", q) == doctest::Approx(1.01 / 3.01));
  CHECK(RelationRelevance("http://ex.org/unrelated", q) == doctest::Approx(0.01 / 1.01));
}

TEST_CASE("hand-computed path scores and ordering") {
  KgStore s = OverlapStore();
  Subgraph g = RetrieveSubgraph(s, {"http://ex.org/a"}, QuestionTerms("birth place of Ada, and year?"));
  REQUIRE(g.paths.size() == 2);
  CHECK(g.paths[0].steps[0].relation == "http://ex.org/birthPlaceCity");
  CHECK(g.paths[0].score == doctest::Approx(0.6678).epsilon(1e-3));
  CHECK(g.paths[1].steps[0].relation == "http://ex.org/deathDateYear");
  CHECK(g.paths[1].score == doctest::Approx(0.3355).epsilon(1e-3));
  CHECK(g.paths[0].terminal() == "http://ex.org/b");

  RetrievalOptions one;
  one.top_k = 1;
  Subgraph top = RetrieveSubgraph(s, {"http://ex.org/a"}, QuestionTerms("birth place of Ada, and year?"), one);
  REQUIRE(top.paths.size() == 1);
  CHECK(top.paths[0] == g.paths[0]);
  CHECK(RelationsOf(top) == std::set<std::string>{"http://ex.org/birthPlaceCity"});
  CHECK(RelationsOf(Subgraph{}).empty());
}

TEST_CASE("ray barone subgraph excludes the film relation") {
  KgStore s = RayBarone();
  CHECK(s.size() == 9);
  Subgraph g = RetrieveSubgraph(s, {kRay}, QuestionTerms("Who played Ray Barone?"));
  CHECK(g.relations.count(kNs + "tv.regular_tv_appearance.actor") == 1);
  CHECK(g.relations.count(kNs + "film.performance.actor") == 0);
  CHECK(g.relations == RelationsOf(g));
  CHECK(g.warnings.empty());
  for (std::size_t i = 1; i < g.paths.size(); ++i) CHECK(g.paths[i].score <= g.paths[i - 1].score);
  RetrievalOptions deep;
  deep.max_hops = 4;
  deep.min_score = 0.0;
  CHECK(RetrieveSubgraph(s, {kRay}, {}, deep).relations.count(kNs + "film.performance.actor") == 1);
  nlohmann::json j = SubgraphToJson(g);
  CHECK(j["paths"][0]["relations"][0] == kNs + "tv.regular_tv_appearance.actor");
  CHECK(j["paths"][0]["directions"][0] == "out");
  CHECK(j["paths"][0]["terminal"] == kNs + "m.02bd1z");
}

TEST_CASE("unknown entities and bad options") {
  KgStore s = RayBarone();
  Subgraph g = RetrieveSubgraph(s, {kNs + "m.nothing"}, {"ray"});
  CHECK(g.paths.empty());
  CHECK(g.relations.empty());
  REQUIRE(g.warnings.size() == 1);
  CHECK(g.warnings[0] == "UnknownEntity: " + kNs + "m.nothing");
  RetrievalOptions bad;
  bad.top_k = 0;
  CHECK_THROWS_AS(RetrieveSubgraph(s, {kRay}, {}, bad), std::invalid_argument);
  bad.top_k = 1;
  bad.max_hops = 0;
  CHECK_THROWS_AS(RetrieveSubgraph(s, {kRay}, {}, bad), std::invalid_argument);
}

TEST_CASE("property: retrieval equals exhaustive enumeration") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> log_score(-8.0, 0.0);
  int nonempty = 0;
  for (int trial = 0; trial < 300; ++trial) {
    KgStore s = oracle::RandomStore(rng);
    std::vector<std::string> topics;
    int n_topics = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < n_topics; ++i) topics.push_back(s.triples()[rng() % s.size()].subject);
    if (rng() % 5 == 0) topics.push_back("http://example.org/node/missing");
    std::set<std::string> terms = QuestionTerms(trial % 2 ? "which actor appeared in the regular series"
                                                          : "founded by a person on a birth date");
    RetrievalOptions opt;
    opt.top_k = 1 + rng() % 40;
    opt.min_score = std::pow(10.0, log_score(rng));
    opt.max_hops = 1 + rng() % 2;
    Subgraph g = RetrieveSubgraph(s, topics, terms, opt);
    std::vector<RelationPath> expected = oracle::ExhaustivePaths(s, topics, terms, opt);
    CAPTURE(trial);
    CHECK(g.paths == expected);
    nonempty += !expected.empty();
    for (const RelationPath& p : g.paths) {
      CHECK(p.score >= opt.min_score);
      CHECK(p.score <= 1.0);
      std::string at = p.start;
      for (const PathStep& step : p.steps) {
        KgTriple t = step.direction == EdgeDirection::kForward ? KgTriple{at, step.relation, step.node}
                                                               : KgTriple{step.node, step.relation, at};
        CHECK(std::binary_search(s.triples().begin(), s.triples().end(), t));
        at = step.node;
      }
    }
  }
  CHECK(nonempty > 200);
}

TEST_CASE("property: retrieval is monotone in top_k and min_score") {
  std::mt19937 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    KgStore s = oracle::RandomStore(rng, 120);
    std::vector<std::string> topics = {s.triples()[rng() % s.size()].subject};
    std::set<std::string> terms = QuestionTerms("actor film series date");
    RetrievalOptions small, large;
    small.top_k = 1 + rng() % 10;
    large.top_k = small.top_k + rng() % 20;
    small.min_score = large.min_score = 1e-3;
    std::vector<RelationPath> a = RetrieveSubgraph(s, topics, terms, small).paths;
    std::vector<RelationPath> b = RetrieveSubgraph(s, topics, terms, large).paths;
    REQUIRE(a.size() <= b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    RetrievalOptions strict = large, loose = large;
    strict.min_score = 1e-2;
    loose.min_score = 1e-4;
    std::vector<RelationPath> x = RetrieveSubgraph(s, topics, terms, strict).paths;
    std::vector<RelationPath> y = RetrieveSubgraph(s, topics, terms, loose).paths;
    REQUIRE(x.size() <= y.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == y[i]);
  }
}
