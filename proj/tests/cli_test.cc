/*!
 *  Copyright (c) 2024 by Contributors
 * \file tests/cli_test.cc
 */
#include <doctest.h>

#include <sstream>

#include "kgsparql/cli.h"
#include "kgsparql/pipeline.h"
#include "kgsparql/structure_grammar.h"
#include "oracles.h"

using namespace kgsparql;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Run(const std::vector<std::string>& args, const std::string& stdin_text = "") {
  std::ostringstream out, err;
  std::istringstream in(stdin_text);
  int code = RunCli(args, out, err, in);
  return {code, out.str(), err.str()};
}

const char* kAppleQuery =
    "PREFIX dbo: <http://dbpedia.org/ontology/> SELECT ?founder WHERE { "
    "<http://dbpedia.org/resource/Apple_Inc.> dbo:foundedBy ?founder }";

PrefixTable Prefixes() { return PrefixTable::Load(oracle::DataFile("prefixes.json")); }

}  // namespace

TEST_CASE("preprocess and decompose match the library") {
  CanonicalQuery q = Canonicalize(kAppleQuery, Prefixes());
  CliRun r = Run({"preprocess", "--prefixes", oracle::DataFile("prefixes.json"), kAppleQuery});
  CHECK(r.code == kExitOk);
  CHECK(r.out == q.text + "\n");
  CHECK(Run({"preprocess", "--prefixes", oracle::DataFile("prefixes.json")}, std::string(kAppleQuery) + "\n").out ==
        r.out);

  Decomposition d = Decompose(q);
  CliRun dr = Run({"decompose", "--prefixes", oracle::DataFile("prefixes.json"), kAppleQuery});
  CHECK(dr.code == kExitOk);
  CHECK(dr.out == "structure: " + d.structure.ToString() + "\ncontent: " + d.content.ToString() + "\n");
  CliRun dj = Run({"decompose", "--format", "json", "--prefixes", oracle::DataFile("prefixes.json"), kAppleQuery});
  nlohmann::json j = nlohmann::json::parse(dj.out);
  CHECK(j["structure"] == "select [var] where { [ent] [rel] [var] }");
  CHECK(j["query"] == q.text);

  CliRun m = Run({"merge", "--structure", d.structure.ToString(), "--content", d.content.ToString()});
  CHECK(m.code == kExitOk);
  CHECK(m.out == q.text + "\n");
}

TEST_CASE("validate-structure") {
  CliRun ok = Run({"validate-structure", "select [var] where { [ent] [rel] [var] }"});
  CHECK(ok.code == kExitOk);
  CHECK(ok.out == "valid: " + ClassifyStructure(ParseStructure("select [var] where { [ent] [rel] [var] }")).ToString() +
                      "\n");
  CliRun bad = Run({"validate-structure", "select [var] where { [ent] [ent] [var] }"});
  CHECK(bad.code == kExitConstraint);
  CHECK(bad.out == "invalid at token 5; expected: [rel]\n");
  CliRun bj = Run({"validate-structure", "--format", "json", "select [var] where { [ent] [ent] [var] }"});
  nlohmann::json j = nlohmann::json::parse(bj.out);
  CHECK(j["valid"] == false);
  CHECK(j["position"] == 5);
  CHECK(j["expected"] == nlohmann::json::array({"[rel]"}));
}

TEST_CASE("ontology and prompt commands") {
  OntologySnapshot o = LoadOntology(oracle::DataFile("ontology.json"));
  CliRun v = Run({"verbalize-ontology", "--ontology", oracle::DataFile("ontology.json")});
  CHECK(v.code == kExitOk);
  CHECK(v.out == Verbalize(o) + "\n");
  CliRun p = Run({"build-prompt", "--ontology", oracle::DataFile("ontology.json"), "--question", "Who founded Apple?"});
  CHECK(p.out == BuildPrompt(PromptStage::kStructure, "Who founded Apple?", o).text + "\n");
  CliRun c = Run({"build-prompt", "--stage", "C", "--structure", "select [var] where { [ent] [rel] [var] }",
                  "--ontology", oracle::DataFile("ontology.json"), "--question", "Who founded Apple?"});
  CHECK(c.out == BuildPrompt(PromptStage::kContent, "Who founded Apple?", o,
                             ParseStructure("select [var] where { [ent] [rel] [var] }"))
                         .text +
                     "\n");
  CHECK(Run({"build-prompt", "--stage", "C", "--ontology", oracle::DataFile("ontology.json"), "--question", "q"}).code ==
        kExitUsage);
  CHECK(Run({"verbalize-ontology"}).code == kExitUsage);
}

TEST_CASE("subgraph, stats and export-dot") {
  CliRun g = Run({"subgraph", "--format", "json", "--kg", oracle::DataFile("ray_barone.nt"), "--prefixes",
                  oracle::DataFile("prefixes.json"), "--topic", "ns:m.05h7f2", "--question", "Who played Ray Barone?"});
  CHECK(g.code == kExitOk);
  KgStore kg = KgStore::Load(oracle::DataFile("ray_barone.nt"));
  Subgraph lib = RetrieveSubgraph(kg, {ResolveTopic("ns:m.05h7f2", Prefixes())}, QuestionTerms("Who played Ray Barone?"));
  CHECK(g.out == SubgraphToJson(lib).dump() + "\n");

  std::vector<std::string> stats_args = {"stats", "--data", oracle::DataFile("mini_corpus.json"), "--prefixes",
                                         oracle::DataFile("prefixes.json")};
  CliRun s1 = Run(stats_args);
  CliRun s2 = Run(stats_args);
  CHECK(s1.code == kExitOk);
  CHECK(s1.out == s2.out);
  CHECK(s1.out == CorpusStats(LoadDataset(oracle::DataFile("mini_corpus.json")), Prefixes()).ToText());

  CliRun dot = Run({"export-dot"});
  CHECK(dot.code == kExitOk);
  CHECK(dot.out == ConstraintAutomaton::Default().ToDot());
}

TEST_CASE("exit codes") {
  CHECK(Run({}).code == kExitUsage);
  CHECK(Run({"frobnicate"}).code == kExitUsage);
  CHECK(Run({"merge", "--structure", "ask where { [ent] [rel] [ent] }"}).code == kExitUsage);
  CHECK(Run({"preprocess", "select ?x where {"}).code == kExitParse);
  CHECK(Run({"validate-structure", "select [bogus]"}).code == kExitParse);
  CliRun tag = Run({"merge", "--structure", "select [var] where { [ent] [rel] [var] }", "--content",
                    "[var] var0 [var] dbr:Microsoft [rel] dbo:foundedBy [var] var0"});
  CHECK(tag.code == kExitConstraint);
  CHECK(tag.err.find("error:") == 0);
  CHECK(Run({"preprocess", "--prefixes", "/nonexistent/prefixes.json", "ask { <a> <b> <c> }"}).code == kExitIo);
  CHECK(Run({"stats", "--data", "/nonexistent/corpus.json"}).code == kExitIo);
  CHECK(Run({"--help"}).code == kExitOk);
}

TEST_CASE("pipeline helpers") {
  PrefixTable p = Prefixes();
  CHECK(ResolveTopic("<http://ex.org/a>", p) == "http://ex.org/a");
  CHECK(ResolveTopic("dbr:Apple_Inc.", p) == "http://dbpedia.org/resource/Apple_Inc.");
  CHECK(ResolveTopic("plain", p) == "plain");
  CHECK(QuestionLiterals("Films after 2000 named \"Up\" in 3D?") == std::vector<std::string>{"2000", "\"Up\""});
  Vocabulary v = ContentVocabulary("Born after 1950?", nullptr, nullptr, p, {"dbo:extra"});
  CHECK(v.Find("[var]").has_value());
  CHECK(v.Find("var9").has_value());
  CHECK(v.Find("1950").has_value());
  CHECK(v.Find("dbo:extra").has_value());
  CHECK_FALSE(v.Find("dbo:foundedBy").has_value());
}

TEST_CASE("pipeline on the apple question") {
  std::vector<DatasetRecord> corpus = LoadDataset(oracle::DataFile("mini_corpus.json"));
  OntologySnapshot o = LoadOntology(oracle::DataFile("ontology.json"));
  PrefixTable p = Prefixes();
  PipelineInputs in;
  in.question = "Who founded Apple?";
  in.prefixes = &p;
  in.ontology = &o;
  in.corpus = &corpus;
  PipelineOptions opt;
  opt.scorer = ScorerKind::kNgram;
  PipelineResult r = RunPipeline(in, opt);
  REQUIRE(r.query.has_value());
  CHECK(ValidateStructure(r.structure.tokens).valid);
  CHECK(r.query->text == Merge(r.structure, *r.content).text);
  CHECK(r.structure.ToString() == "select [var] where { [ent] [rel] [var] }");
  std::vector<nlohmann::json> lines = PipelineToJson(r);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0]["stage"] == "S");
  CHECK(lines[1]["stage"] == "C");
  CHECK(lines[2]["query"] == r.query->text);

  CliRun cli = Run({"decode", "--question", "Who founded Apple?", "--data", oracle::DataFile("mini_corpus.json"),
                    "--scorer", "ngram", "--prefixes", oracle::DataFile("prefixes.json"), "--ontology",
                    oracle::DataFile("ontology.json")});
  CHECK(cli.code == kExitOk);
  CHECK(cli.out == "structure: " + r.structure.ToString() + "\ncontent: " + r.content->ToString() + "\nquery: " +
                       r.query->text + "\n");

  opt.scorer = ScorerKind::kNgram;
  in.corpus = nullptr;
  CHECK_THROWS_AS(RunPipeline(in, opt), std::invalid_argument);
}

TEST_CASE("pipeline subgraph modes on ray barone") {
  std::vector<DatasetRecord> corpus = LoadDataset(oracle::DataFile("mini_corpus.json"));
  OntologySnapshot o = LoadOntology(oracle::DataFile("freebase_ontology.json"));
  KgStore kg = KgStore::Load(oracle::DataFile("ray_barone.nt"));
  PrefixTable p = Prefixes();
  PipelineInputs in;
  in.question = "Who played Ray Barone?";
  in.prefixes = &p;
  in.ontology = &o;
  in.corpus = &corpus;
  in.kg = &kg;
  in.topics = {"ns:m.05h7f2"};
  PipelineOptions opt;
  opt.scorer = ScorerKind::kNgram;
  PipelineResult hard = RunPipeline(in, opt);
  REQUIRE(hard.subgraph.has_value());
  CHECK(hard.content_stage.vocab.Find("ns:m.05h7f2").has_value());
  CHECK(hard.allowed_relations.count("ns:tv.regular_tv_appearance.actor") == 1);
  CHECK(hard.allowed_relations.count("ns:film.performance.actor") == 0);
  for (const Hypothesis& h : hard.content_stage.hypotheses) {
    for (TokenId id : h.tokens) CHECK(hard.content_stage.vocab.tokens()[id] != "ns:film.performance.actor");
  }
  REQUIRE(hard.content.has_value());
  bool uses_tv = false;
  for (const ContentPair& pair : hard.content->pairs) {
    if (pair.tag == Placeholder::kRel) uses_tv |= pair.value == "ns:tv.regular_tv_appearance.actor";
  }
  CHECK(uses_tv);
}
