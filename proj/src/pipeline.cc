/*!
 *  Copyright (c) 2024 by Contributors
 * \file src/pipeline.cc
 */
#include "kgsparql/pipeline.h"

#include <cctype>
#include <memory>
#include <stdexcept>

namespace kgsparql {

namespace {

std::vector<Decomposition> TrainDecompositions(const std::vector<DatasetRecord>* corpus,
                                               const PrefixTable& prefixes, const OntologySnapshot* ontology) {
  std::vector<Decomposition> out;
  if (!corpus) return out;
  for (const DatasetRecord& r : *corpus) {
    if (r.split != Split::kTrain) continue;
    try {
      out.push_back(Decompose(Canonicalize(r.sparql, prefixes), ontology));
    } catch (const Error&) {
    }
  }
  return out;
}

std::vector<std::string> ContentSequence(const ContentAssignment& content) {
  std::vector<std::string> seq;
  for (const ContentPair& p : content.pairs) {
    seq.emplace_back(ToString(p.tag));
    seq.push_back(p.value);
  }
  return seq;
}

std::unique_ptr<Scorer> MakeScorer(const PipelineOptions& options, Vocabulary vocab,
                                   const std::vector<std::vector<std::string>>& corpus) {
  if (options.scorer == ScorerKind::kUniform) return std::make_unique<UniformScorer>(std::move(vocab));
  if (corpus.empty()) throw std::invalid_argument("the n-gram scorer needs a training split");
  return std::make_unique<NgramScorer>(TrainNgram(corpus, options.ngram_order, options.alpha, std::move(vocab)));
}

}  // namespace

std::string ResolveTopic(const std::string& topic, const PrefixTable& prefixes) {
  if (topic.size() >= 2 && topic.front() == '<' && topic.back() == '>') return topic.substr(1, topic.size() - 2);
  if (auto full = prefixes.Expand(topic)) return *full;
  return topic;
}

std::vector<std::string> QuestionLiterals(std::string_view question) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < question.size();) {
    char c = question[i];
    if (c == '"') {
      auto end = question.find('"', i + 1);
      if (end == std::string_view::npos) break;
      out.emplace_back(question.substr(i, end - i + 1));
      i = end + 1;
    } else if (std::isdigit(static_cast<unsigned char>(c)) &&
               (i == 0 || !std::isalnum(static_cast<unsigned char>(question[i - 1])))) {
      std::size_t end = i;
      while (end < question.size() && std::isdigit(static_cast<unsigned char>(question[end]))) ++end;
      if (end == question.size() || !std::isalpha(static_cast<unsigned char>(question[end]))) {
        out.emplace_back(question.substr(i, end - i));
      }
      i = end;
    } else {
      ++i;
    }
  }
  return out;
}

Vocabulary ContentVocabulary(std::string_view question, const OntologySnapshot* ontology,
                             const std::vector<DatasetRecord>* corpus, const PrefixTable& prefixes,
                             const std::set<std::string>& extra) {
  std::vector<std::string> tokens;
  for (Placeholder p : kAllPlaceholders) tokens.emplace_back(ToString(p));
  for (int i = 0; i < 10; ++i) tokens.push_back("var" + std::to_string(i));
  for (std::string& lit : QuestionLiterals(question)) tokens.push_back(std::move(lit));
  if (ontology) {
    for (const auto* list : {&ontology->concepts(), &ontology->relations(), &ontology->entities()}) {
      for (const std::string& label : *list) {
        if (label.find(':') != std::string::npos) tokens.push_back(label);
      }
    }
  }
  for (const Decomposition& d : TrainDecompositions(corpus, prefixes, ontology)) {
    for (const ContentPair& p : d.content.pairs) tokens.push_back(p.value);
  }
  tokens.insert(tokens.end(), extra.begin(), extra.end());
  return Vocabulary(std::move(tokens));
}

PipelineResult RunPipeline(const PipelineInputs& inputs, const PipelineOptions& options) {
  static const PrefixTable kNoPrefixes;
  const PrefixTable& prefixes = inputs.prefixes ? *inputs.prefixes : kNoPrefixes;
  PipelineResult result;
  std::vector<Decomposition> train = TrainDecompositions(inputs.corpus, prefixes, inputs.ontology);

  // Structure stage.
  std::vector<std::vector<std::string>> structure_corpus, content_corpus;
  for (const Decomposition& d : train) {
    std::vector<std::string> seq;
    for (StructureToken t : d.structure.tokens) seq.emplace_back(t.text());
    structure_corpus.push_back(std::move(seq));
    content_corpus.push_back(ContentSequence(d.content));
  }
  auto structure_scorer = MakeScorer(options, Vocabulary::Structure(), structure_corpus);
  DecodeContext sctx;
  sctx.beam_size = options.beam_size;
  sctx.max_length = options.max_length;
  ConstraintPtr grammar = MakeGrammarConstraint(ConstraintAutomaton::Default(), structure_scorer->vocab());
  result.structure_stage.vocab = structure_scorer->vocab();
  result.structure_stage.hypotheses = BeamSearch(*structure_scorer, std::span(&grammar, 1), sctx);
  for (const Hypothesis& h : result.structure_stage.hypotheses) {
    StructureTemplate st;
    for (TokenId id : h.tokens) st.tokens.push_back(StructureToken::Parse(result.structure_stage.vocab.text(id)));
    result.structure_stage.valid.push_back(ValidateStructure(st.tokens).valid);
  }
  for (TokenId id : result.structure_stage.hypotheses.front().tokens) {
    result.structure.tokens.push_back(StructureToken::Parse(result.structure_stage.vocab.text(id)));
  }

  // Subgraph.
  if (inputs.kg && !inputs.topics.empty()) {
    std::vector<std::string> topics;
    for (const std::string& t : inputs.topics) topics.push_back(ResolveTopic(t, prefixes));
    result.subgraph = RetrieveSubgraph(*inputs.kg, topics, QuestionTerms(inputs.question), options.retrieval);
    for (const std::string& rel : result.subgraph->relations) {
      auto compact = prefixes.Compact(rel);
      result.allowed_relations.insert(compact ? *compact : "<" + rel + ">");
    }
  }

  // Content stage.
  std::set<std::string> extra = result.allowed_relations;
  for (const std::string& t : inputs.topics) {
    std::string full = ResolveTopic(t, prefixes);
    auto compact = prefixes.Compact(full);
    extra.insert(compact ? *compact : "<" + full + ">");
  }
  Vocabulary content_vocab = ContentVocabulary(inputs.question, inputs.ontology, inputs.corpus, prefixes, extra);
  auto content_scorer = MakeScorer(options, std::move(content_vocab), content_corpus);
  const Vocabulary& cv = content_scorer->vocab();
  DecodeContext cctx;
  cctx.stage = DecodeStage::kContent;
  cctx.expected_structure = result.structure;
  cctx.beam_size = options.beam_size;
  cctx.max_length = std::max<int>(1, 2 * static_cast<int>(result.structure.Placeholders().size()));
  std::vector<ConstraintPtr> constraints{MakeStructureConstraint(result.structure, cv), MakeValueKindConstraint(cv)};
  if (result.subgraph) {
    cctx.allowed_relations = result.allowed_relations;
    constraints.push_back(MakeSubgraphConstraint(result.allowed_relations, options.subgraph_mode, cv, options.bonus));
  }
  result.content_stage.vocab = cv;
  result.content_stage.hypotheses = BeamSearch(*content_scorer, constraints, cctx);

  for (const Hypothesis& h : result.content_stage.hypotheses) {
    ContentAssignment content;
    for (std::size_t i = 0; i + 1 < h.tokens.size(); i += 2) {
      content.pairs.push_back({*ParsePlaceholder(cv.text(h.tokens[i])), cv.text(h.tokens[i + 1])});
    }
    bool ok = false;
    try {
      CanonicalQuery q = Merge(result.structure, content);
      ok = true;
      if (!result.query) {
        result.query = std::move(q);
        result.content = std::move(content);
      }
    } catch (const Error&) {
    }
    result.content_stage.valid.push_back(ok);
  }
  return result;
}

std::vector<nlohmann::json> PipelineToJson(const PipelineResult& result) {
  auto stage = [](const char* name, const StageOutput& s) {
    nlohmann::json hyps = nlohmann::json::array();
    for (std::size_t i = 0; i < s.hypotheses.size(); ++i) {
      hyps.push_back(HypothesisToJson(s.vocab, s.hypotheses[i], static_cast<int>(i + 1), s.valid[i]));
    }
    return nlohmann::json{{"stage", name}, {"hypotheses", hyps}};
  };
  std::vector<nlohmann::json> lines;
  lines.push_back(stage("S", result.structure_stage));
  if (result.subgraph) lines.push_back({{"stage", "subgraph"}, {"subgraph", SubgraphToJson(*result.subgraph)}});
  lines.push_back(stage("C", result.content_stage));
  nlohmann::json final{{"structure", result.structure.ToString()}};
  final["content"] = result.content ? nlohmann::json(result.content->ToString()) : nlohmann::json(nullptr);
  final["query"] = result.query ? nlohmann::json(result.query->text) : nlohmann::json(nullptr);
  lines.push_back(std::move(final));
  return lines;
}

}  // namespace kgsparql
