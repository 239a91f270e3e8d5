/*!
 *  Copyright (c) 2024 by Contributors
 * \file kgsparql/scaffold.h
 * \brief Split a canonical query into a placeholder structure plus content, and merge back.
 *
 * Term classification: predicates are [rel]; objects of rdf:type and concept-listed terms
 * are [cct]; other IRIs are [ent]; variables [var]; literals [val]; filter, having and
 * non-variable sort expressions become one opaque [con]. Ontology lists take precedence over
 * position, except where the grammar slot admits only one tag.
 */
#ifndef KGSPARQL_SCAFFOLD_H_
#define KGSPARQL_SCAFFOLD_H_

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgsparql/error.h"
#include "kgsparql/ontology.h"
#include "kgsparql/sparql.h"
#include "kgsparql/structure_grammar.h"

namespace kgsparql {

struct ContentPair {
  Placeholder tag = Placeholder::kEnt;
  std::string value;

  friend bool operator==(const ContentPair&, const ContentPair&) = default;
};

/*! \brief Placeholder fillers in the left-to-right placeholder order of a structure. */
struct ContentAssignment {
  std::vector<ContentPair> pairs;

  /*! \brief "[var] var0 [ent] dbr:Apple_Inc. ..." */
  std::string ToString() const;
  std::vector<Placeholder> Tags() const;

  friend bool operator==(const ContentAssignment&, const ContentAssignment&) = default;
};

/*!
 * \brief Parse the "tag value tag value ..." form. Tags are recognized outside string
 * literals only, so literal values may contain spaces. \throws FormatError
 */
ContentAssignment ParseContent(std::string_view text);

struct Decomposition {
  StructureTemplate structure;
  ContentAssignment content;
  /*! ClassificationAmbiguity findings. */
  std::vector<std::string> warnings;
};

/*!
 * \throws UnsupportedError for variable predicates (no placeholder admits them).
 */
Decomposition Decompose(const CanonicalQuery& query, const OntologySnapshot* ontology = nullptr);

class ArityMismatchError : public Error {
 public:
  ArityMismatchError(std::size_t expected, std::size_t got);
  std::size_t expected() const { return expected_; }
  std::size_t got() const { return got_; }

 private:
  std::size_t expected_;
  std::size_t got_;
};

/*! \brief Structure and content disagree at 1-based placeholder `position`. */
class TagMismatchError : public Error {
 public:
  TagMismatchError(std::size_t position, Placeholder structure_tag, Placeholder content_tag);
  std::size_t position() const { return position_; }
  Placeholder structure_tag() const { return structure_tag_; }
  Placeholder content_tag() const { return content_tag_; }

 private:
  std::size_t position_;
  Placeholder structure_tag_;
  Placeholder content_tag_;
};

/*! \brief Substitution produced text outside the SPARQL subset. */
class ParseFailureError : public Error {
 public:
  ParseFailureError(std::string text, const std::string& reason);
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

/*!
 * \brief Substitute placeholder i with value i and reparse. Variables are not renamed.
 * \throws ArityMismatchError, TagMismatchError, ParseFailureError
 */
CanonicalQuery Merge(const StructureTemplate& structure, const ContentAssignment& content);

struct ConsistencyReport {
  bool consistent = false;
  /*! Empty when consistent; otherwise the error or first divergence. */
  std::string detail;
  /*! Byte offset of the first divergence, when both texts exist. */
  std::optional<std::size_t> divergence;
};

/*! \brief True iff Merge(Decompose(query)) reproduces query.text byte for byte. */
ConsistencyReport CheckConsistency(const CanonicalQuery& query,
                                   const OntologySnapshot* ontology = nullptr);

}  // namespace kgsparql

#endif  // KGSPARQL_SCAFFOLD_H_
