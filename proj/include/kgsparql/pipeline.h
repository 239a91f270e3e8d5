/*!
 *  Copyright (c) 2024 by Contributors
 * \file kgsparql/pipeline.h
 * \brief Two-stage generation: structure decode, content decode, merge.
 */
#ifndef KGSPARQL_PIPELINE_H_
#define KGSPARQL_PIPELINE_H_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgsparql/corpus.h"
#include "kgsparql/decoder.h"
#include "kgsparql/kg_store.h"
#include "kgsparql/ontology.h"
#include "kgsparql/scaffold.h"
#include "kgsparql/sparql.h"

namespace kgsparql {

enum class ScorerKind { kUniform, kNgram };

struct PipelineOptions {
  int beam_size = 4;
  /*! Structure stage length limit; the content stage uses twice the placeholder count. */
  int max_length = 64;
  ScorerKind scorer = ScorerKind::kUniform;
  int ngram_order = 3;
  double alpha = 1.0;
  SubgraphMode subgraph_mode = SubgraphMode::kHard;
  double bonus = 2.0;
  RetrievalOptions retrieval;
};

struct PipelineInputs {
  std::string question;
  const PrefixTable* prefixes = nullptr;
  const OntologySnapshot* ontology = nullptr;
  /*! Train split feeds the n-gram scorers and the content vocabulary. */
  const std::vector<DatasetRecord>* corpus = nullptr;
  const KgStore* kg = nullptr;
  /*! Prefixed names are expanded with `prefixes`. */
  std::vector<std::string> topics;
};

struct StageOutput {
  Vocabulary vocab{std::vector<std::string>{}};
  std::vector<Hypothesis> hypotheses;
  std::vector<bool> valid;
};

struct PipelineResult {
  StageOutput structure_stage;
  StructureTemplate structure;
  StageOutput content_stage;
  std::optional<Subgraph> subgraph;
  /*! Relations handed to the subgraph constraint, compacted with the prefix table. Compacted topics and these relations extend the content vocabulary. */
  std::set<std::string> allowed_relations;
  /*! First content hypothesis that merges. */
  std::optional<ContentAssignment> content;
  std::optional<CanonicalQuery> query;
};

/*! \brief "<iri>" and prefixed names become store identifiers; anything else is kept. */
std::string ResolveTopic(const std::string& topic, const PrefixTable& prefixes);

/*! \brief Quoted strings and standalone integers of a question, in order of appearance. */
std::vector<std::string> QuestionLiterals(std::string_view question);

/*!
 * \brief Content vocabulary: placeholder tags, var0..var9, question literals, prefixed ontology
 * labels, content values of the training records and `extra` values.
 */
Vocabulary ContentVocabulary(std::string_view question, const OntologySnapshot* ontology,
                             const std::vector<DatasetRecord>* corpus, const PrefixTable& prefixes,
                             const std::set<std::string>& extra = {});

/*!
 * \throws AllBeamsDeadError, std::invalid_argument (n-gram scorer without a training split)
 */
PipelineResult RunPipeline(const PipelineInputs& inputs, const PipelineOptions& options);

/*! \brief One JSON object per stage plus a final {"query": ...} object. */
std::vector<nlohmann::json> PipelineToJson(const PipelineResult& result);

}  // namespace kgsparql

#endif  // KGSPARQL_PIPELINE_H_
