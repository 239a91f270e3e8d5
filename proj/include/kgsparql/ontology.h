/*!
 *  Copyright (c) 2024 by Contributors
 * \file kgsparql/ontology.h
 * \brief Ontology snapshots, their textual verbalization, and stage prompts.
 */
#ifndef KGSPARQL_ONTOLOGY_H_
#define KGSPARQL_ONTOLOGY_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kgsparql/error.h"
#include "kgsparql/structure_grammar.h"

namespace kgsparql {

class DuplicateLabelError : public Error {
 public:
  DuplicateLabelError(std::string label, std::vector<std::string> lists);
  const std::string& label() const { return label_; }
  /*! Names of the lists containing the label ("concepts", "relations", "entities"). */
  const std::vector<std::string>& lists() const { return lists_; }

 private:
  std::string label_;
  std::vector<std::string> lists_;
};

enum class LabelKind { kConcept, kRelation, kEntity };

/*!
 * \brief Concept, relation and entity labels of a KG slice.
 *
 * The three lists are pairwise disjoint and duplicate-free; source order is preserved because
 * verbalization is order-sensitive.
 */
class OntologySnapshot {
 public:
  OntologySnapshot() = default;
  /*! \throws DuplicateLabelError */
  OntologySnapshot(std::vector<std::string> concepts, std::vector<std::string> relations,
                   std::vector<std::string> entities);

  const std::vector<std::string>& concepts() const { return concepts_; }
  const std::vector<std::string>& relations() const { return relations_; }
  const std::vector<std::string>& entities() const { return entities_; }
  bool empty() const { return concepts_.empty() && relations_.empty() && entities_.empty(); }

  /*!
   * \brief Which list, if any, contains `term`. A term matches a label when the texts are
   * equal, or when the label has no ':' and equals the term's local name (the part after the
   * prefix label, or after the last '/' or '#' of a full IRI).
   */
  std::optional<LabelKind> Classify(std::string_view term) const;

  friend bool operator==(const OntologySnapshot&, const OntologySnapshot&) = default;

 private:
  std::vector<std::string> concepts_;
  std::vector<std::string> relations_;
  std::vector<std::string> entities_;
};

/*!
 * \brief Parse {"concepts": [...], "relations": [...], "entities": [...]}. Missing keys are
 * empty lists. \throws FormatError, DuplicateLabelError
 */
OntologySnapshot ParseOntology(std::string_view json_text);
OntologySnapshot LoadOntology(const std::filesystem::path& path);

/*!
 * \brief "ontology: concepts: C1, C2; relations: R1, ...; entities: E1, ..."
 */
std::string Verbalize(const OntologySnapshot& ontology);

/*!
 * \brief Inverse of Verbalize for labels free of ',' and ';'. \throws FormatError
 */
OntologySnapshot ParseVerbalization(std::string_view text);

/******************* Prompts *******************/

enum class PromptStage { kStructure, kContent };

inline constexpr std::string_view kPromptPrefix =
    "translate the question into sparql according to the ontology:";

/*!
 * \brief One element of a hybrid prompt: a named learnable-vector slot (no payload) or text.
 */
struct PromptSegment {
  enum class Kind { kSlot, kText };
  Kind kind = Kind::kText;
  /*! Slot name ("v_B", "v_Q", "v_G", "v_E") or the text itself. */
  std::string value;

  static PromptSegment Slot(std::string name) { return {Kind::kSlot, std::move(name)}; }
  static PromptSegment Text(std::string text) { return {Kind::kText, std::move(text)}; }

  friend bool operator==(const PromptSegment&, const PromptSegment&) = default;
};

/*!
 * \brief v_B, prefix text, v_Q, question, v_G, ontology text, v_E. For the content stage the
 * prefix text also carries the predicted structure.
 */
struct PromptLayout {
  PromptStage stage = PromptStage::kStructure;
  std::vector<PromptSegment> segments;

  /*! \brief {"stage":"S","segments":[{"slot":"v_B"},{"text":"..."}, ...]} */
  nlohmann::json ToJson() const;
};

struct Prompt {
  PromptLayout layout;
  std::string text;
};

class MissingStructureError : public Error {
 public:
  MissingStructureError() : Error("content-stage prompt requires a structure") {}
};

/*!
 * \brief Structure stage: "<prefix> <question> | <ontology>".
 * Content stage: "<prefix> <structure> | <question> | <ontology>".
 */
Prompt BuildPrompt(PromptStage stage, std::string_view question, const OntologySnapshot& ontology,
                   const std::optional<StructureTemplate>& structure = std::nullopt);

}  // namespace kgsparql

#endif  // KGSPARQL_ONTOLOGY_H_
