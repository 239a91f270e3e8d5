/*!
 *  Copyright (c) 2024 by Contributors
 * \file src/cli.cc
 */
#include "kgsparql/cli.h"

#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "kgsparql/corpus.h"
#include "kgsparql/decoder.h"
#include "kgsparql/kg_store.h"
#include "kgsparql/ontology.h"
#include "kgsparql/pipeline.h"
#include "kgsparql/scaffold.h"
#include "kgsparql/sparql.h"
#include "kgsparql/structure_grammar.h"

namespace kgsparql {

namespace {

struct Options {
  std::string format = "text";
  std::string prefixes;
  std::string ontology;
  std::string kg;
  std::string data;
  std::string lcquad_train;
  std::string lcquad_test;
  std::string query;
  std::string structure;
  std::string content;
  std::string stage = "S";
  std::string question;
  std::vector<std::string> topics;
  std::string scorer = "uniform";
  std::string subgraph_mode = "hard";
  PipelineOptions pipeline;
};

std::string Trim(std::string s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

std::string ReadFile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

class Runner {
 public:
  Runner(const Options& o, std::ostream& out, std::istream& in) : o_(o), out_(out), in_(in) {}

  void Preprocess() {
    CanonicalQuery q = Canonicalize(Input(o_.query), Prefixes());
    if (Json()) {
      out_ << nlohmann::json{{"text", q.text}, {"var_map", q.var_map}, {"warnings", q.warnings}}.dump() << '\n';
    } else {
      out_ << q.text << '\n';
      for (const std::string& w : q.warnings) out_ << "warning: " << w << '\n';
    }
  }

  void Decomposition() {
    CanonicalQuery q = Canonicalize(Input(o_.query), Prefixes());
    std::optional<OntologySnapshot> onto = MaybeOntology();
    kgsparql::Decomposition d = Decompose(q, onto ? &*onto : nullptr);
    if (Json()) {
      out_ << nlohmann::json{{"query", q.text},
                             {"structure", d.structure.ToString()},
                             {"content", d.content.ToString()},
                             {"warnings", d.warnings}}
                  .dump()
           << '\n';
    } else {
      out_ << "structure: " << d.structure.ToString() << '\n';
      out_ << "content: " << d.content.ToString() << '\n';
      for (const std::string& w : d.warnings) out_ << "warning: " << w << '\n';
    }
  }

  void MergeParts() {
    CanonicalQuery q = Merge(ParseStructure(o_.structure), ParseContent(o_.content));
    if (Json()) {
      out_ << nlohmann::json{{"query", q.text}}.dump() << '\n';
    } else {
      out_ << q.text << '\n';
    }
  }

  bool Validate() {
    StructureTemplate st = ParseStructure(Input(o_.structure));
    ValidationResult r = ValidateStructure(st.tokens);
    std::vector<std::string> expected;
    for (StructureToken t : r.expected) expected.emplace_back(t.text());
    if (Json()) {
      nlohmann::json j{{"valid", r.valid}};
      if (r.valid) {
        j["complexity"] = ClassifyStructure(st).ToString();
      } else {
        j["position"] = r.position;
        j["expected"] = expected;
      }
      out_ << j.dump() << '\n';
    } else if (r.valid) {
      out_ << "valid: " << ClassifyStructure(st).ToString() << '\n';
    } else {
      out_ << "invalid at token " << r.position << "; expected:";
      for (const std::string& e : expected) out_ << ' ' << e;
      out_ << '\n';
    }
    return r.valid;
  }

  void VerbalizeOntology() {
    std::string text = Verbalize(RequireOntology());
    if (Json()) {
      out_ << nlohmann::json{{"verbalization", text}}.dump() << '\n';
    } else {
      out_ << text << '\n';
    }
  }

  void Prompt() {
    PromptStage stage = o_.stage == "C" ? PromptStage::kContent : PromptStage::kStructure;
    std::optional<StructureTemplate> st;
    if (!o_.structure.empty()) st = ParseStructure(o_.structure);
    kgsparql::Prompt p = BuildPrompt(stage, o_.question, RequireOntology(), st);
    if (Json()) {
      out_ << nlohmann::json{{"text", p.text}, {"layout", p.layout.ToJson()}}.dump() << '\n';
    } else {
      out_ << p.text << '\n';
    }
  }

  bool Decode() {
    PrefixTable prefixes = Prefixes();
    std::optional<OntologySnapshot> onto = MaybeOntology();
    std::optional<std::vector<DatasetRecord>> corpus;
    if (!o_.data.empty()) corpus = LoadDataset(o_.data);
    std::optional<KgStore> kg;
    if (!o_.kg.empty()) kg = KgStore::Load(o_.kg);

    PipelineInputs inputs;
    inputs.question = o_.question;
    inputs.prefixes = &prefixes;
    inputs.ontology = onto ? &*onto : nullptr;
    inputs.corpus = corpus ? &*corpus : nullptr;
    inputs.kg = kg ? &*kg : nullptr;
    inputs.topics = o_.topics;
    PipelineOptions options = o_.pipeline;
    options.scorer = o_.scorer == "ngram" ? ScorerKind::kNgram : ScorerKind::kUniform;
    options.subgraph_mode = o_.subgraph_mode == "bonus" ? SubgraphMode::kBonus : SubgraphMode::kHard;
    PipelineResult result = RunPipeline(inputs, options);

    if (Json()) {
      for (const nlohmann::json& line : PipelineToJson(result)) out_ << line.dump() << '\n';
    } else {
      out_ << "structure: " << result.structure.ToString() << '\n';
      out_ << "content: " << (result.content ? result.content->ToString() : "(none)") << '\n';
      out_ << "query: " << (result.query ? result.query->text : "(none)") << '\n';
    }
    return result.query.has_value();
  }

  void Retrieve() {
    KgStore kg = KgStore::Load(RequirePath(o_.kg, "--kg"));
    PrefixTable prefixes = Prefixes();
    std::vector<std::string> topics;
    for (const std::string& t : o_.topics) topics.push_back(ResolveTopic(t, prefixes));
    Subgraph g = RetrieveSubgraph(kg, topics, QuestionTerms(o_.question), o_.pipeline.retrieval);
    if (Json()) {
      out_ << SubgraphToJson(g).dump() << '\n';
      return;
    }
    for (const RelationPath& p : g.paths) {
      out_ << p.score << ' ' << p.start;
      for (const PathStep& s : p.steps) {
        out_ << (s.direction == EdgeDirection::kForward ? " -" : " <-") << s.relation
             << (s.direction == EdgeDirection::kForward ? "-> " : "- ") << s.node;
      }
      out_ << '\n';
    }
    out_ << "relations:";
    for (const std::string& r : g.relations) out_ << ' ' << r;
    out_ << '\n';
    for (const std::string& w : g.warnings) out_ << "warning: " << w << '\n';
  }

  void Stats() {
    std::vector<DatasetRecord> records;
    if (!o_.data.empty()) records = LoadDataset(o_.data);
    if (!o_.lcquad_train.empty()) {
      auto more = ParseLcQuad(ReadFile(o_.lcquad_train), Split::kTrain);
      records.insert(records.end(), more.begin(), more.end());
    }
    if (!o_.lcquad_test.empty()) {
      auto more = ParseLcQuad(ReadFile(o_.lcquad_test), Split::kTest);
      records.insert(records.end(), more.begin(), more.end());
    }
    std::optional<OntologySnapshot> onto = MaybeOntology();
    StructureStats stats = CorpusStats(records, Prefixes(), onto ? &*onto : nullptr);
    if (Json()) {
      out_ << stats.ToJson().dump() << '\n';
    } else {
      out_ << stats.ToText();
    }
  }

  void ExportDot() { out_ << ConstraintAutomaton::Default().ToDot(); }

 private:
  bool Json() const { return o_.format == "json"; }

  std::string Input(const std::string& given) {
    if (!given.empty()) return given;
    std::string text(std::istreambuf_iterator<char>(in_), {});
    return Trim(std::move(text));
  }

  static const std::string& RequirePath(const std::string& path, const char* flag) {
    if (path.empty()) throw std::invalid_argument(std::string(flag) + " is required");
    return path;
  }

  PrefixTable Prefixes() const { return o_.prefixes.empty() ? PrefixTable() : PrefixTable::Load(o_.prefixes); }

  std::optional<OntologySnapshot> MaybeOntology() const {
    if (o_.ontology.empty()) return std::nullopt;
    return LoadOntology(o_.ontology);
  }

  OntologySnapshot RequireOntology() const { return LoadOntology(RequirePath(o_.ontology, "--ontology")); }

  const Options& o_;
  std::ostream& out_;
  std::istream& in_;
};

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in) {
  Options o;
  CLI::App app{"Two-stage SPARQL structure and content toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  };
  auto add_prefixes = [&](CLI::App* c) { c->add_option("--prefixes", o.prefixes, "Prefix table JSON"); };
  auto add_ontology = [&](CLI::App* c) { c->add_option("--ontology", o.ontology, "Ontology JSON"); };
  auto add_retrieval = [&](CLI::App* c) {
    c->add_option("--kg", o.kg, "N-Triples knowledge graph");
    c->add_option("--topic", o.topics, "Topic entity (repeatable)");
    c->add_option("--topk", o.pipeline.retrieval.top_k, "Paths kept")->check(CLI::PositiveNumber);
    c->add_option("--min-score", o.pipeline.retrieval.min_score, "Path score threshold");
    c->add_option("--max-hops", o.pipeline.retrieval.max_hops, "Maximum path length")->check(CLI::PositiveNumber);
  };

  auto* preprocess = app.add_subcommand("preprocess", "Canonicalize a query");
  preprocess->add_option("query", o.query, "Query text (default: stdin)");
  add_prefixes(preprocess);
  add_format(preprocess);

  auto* decompose = app.add_subcommand("decompose", "Split a query into structure and content");
  decompose->add_option("query", o.query, "Query text (default: stdin)");
  add_prefixes(decompose);
  add_ontology(decompose);
  add_format(decompose);

  auto* merge = app.add_subcommand("merge", "Fill a structure with content");
  merge->add_option("--structure", o.structure, "Structure template")->required();
  merge->add_option("--content", o.content, "Content assignment")->required();
  add_format(merge);

  auto* validate = app.add_subcommand("validate-structure", "Check a structure against the grammar");
  validate->add_option("structure", o.structure, "Structure template (default: stdin)");
  add_format(validate);

  auto* verbalize = app.add_subcommand("verbalize-ontology", "Render the ontology prompt segment");
  add_ontology(verbalize);
  add_format(verbalize);

  auto* prompt = app.add_subcommand("build-prompt", "Assemble a stage prompt");
  prompt->add_option("--stage", o.stage, "S or C")->check(CLI::IsMember({"S", "C"}));
  prompt->add_option("--question", o.question, "Question")->required();
  prompt->add_option("--structure", o.structure, "Structure (stage C)");
  add_ontology(prompt);
  add_format(prompt);

  auto* decode = app.add_subcommand("decode", "Structure decode, content decode and merge");
  decode->add_option("--question", o.question, "Question")->required();
  decode->add_option("--data", o.data, "Dataset JSON (train split trains the scorers)");
  decode->add_option("--beam", o.pipeline.beam_size, "Beam size")->check(CLI::PositiveNumber);
  decode->add_option("--max-len", o.pipeline.max_length, "Structure length limit")->check(CLI::PositiveNumber);
  decode->add_option("--scorer", o.scorer, "Scorer")->check(CLI::IsMember({"uniform", "ngram"}));
  decode->add_option("--ngram-order", o.pipeline.ngram_order, "n-gram order")->check(CLI::PositiveNumber);
  decode->add_option("--alpha", o.pipeline.alpha, "Laplace constant")->check(CLI::PositiveNumber);
  decode->add_option("--subgraph-mode", o.subgraph_mode, "Subgraph constraint")->check(CLI::IsMember({"hard", "bonus"}));
  decode->add_option("--bonus", o.pipeline.bonus, "Bonus-mode margin")->check(CLI::NonNegativeNumber);
  add_prefixes(decode);
  add_ontology(decode);
  add_retrieval(decode);
  add_format(decode);

  auto* subgraph = app.add_subcommand("subgraph", "Retrieve top-K relation paths");
  subgraph->add_option("--question", o.question, "Question");
  add_prefixes(subgraph);
  add_retrieval(subgraph);
  add_format(subgraph);

  auto* stats = app.add_subcommand("stats", "Structure statistics per split");
  stats->add_option("--data", o.data, "Dataset JSON");
  stats->add_option("--lcquad-train", o.lcquad_train, "LC-QuAD 1.0 train file");
  stats->add_option("--lcquad-test", o.lcquad_test, "LC-QuAD 1.0 test file");
  add_prefixes(stats);
  add_ontology(stats);
  add_format(stats);

  auto* dot = app.add_subcommand("export-dot", "Print the structure automaton in DOT");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Runner run(o, out, in);
  try {
    if (*preprocess) run.Preprocess();
    if (*decompose) run.Decomposition();
    if (*merge) run.MergeParts();
    if (*validate && !run.Validate()) return kExitConstraint;
    if (*verbalize) run.VerbalizeOntology();
    if (*prompt) run.Prompt();
    if (*decode && !run.Decode()) {
      err << "error: no content hypothesis merged into a valid query\n";
      return kExitConstraint;
    }
    if (*subgraph) run.Retrieve();
    if (*stats) run.Stats();
    if (*dot) run.ExportDot();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ArityMismatchError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConstraint;
  } catch (const TagMismatchError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConstraint;
  } catch (const ParseFailureError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConstraint;
  } catch (const AllBeamsDeadError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConstraint;
  } catch (const MissingStructureError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace kgsparql
