/*!
 *  Copyright (c) 2024 by Contributors
 * \file kgsparql/kg_store.h
 * \brief In-memory N-Triples store and top-K relation path retrieval from topic entities.
 *
 * Node identifiers: IRIs without angle brackets, blank nodes as written ("_:b0"), literals
 * in their surface form including quotes, language tag and datatype.
 */
#ifndef KGSPARQL_KG_STORE_H_
#define KGSPARQL_KG_STORE_H_

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "kgsparql/error.h"

namespace kgsparql {

struct KgTriple {
  std::string subject;
  std::string predicate;
  std::string object;

  friend bool operator==(const KgTriple&, const KgTriple&) = default;
  friend auto operator<=>(const KgTriple&, const KgTriple&) = default;
};

/*! \brief Malformed N-Triples input at 1-based `line`. */
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& detail);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/*! \brief Read-only triple set with subject and object indexes. */
class KgStore {
 public:
  KgStore() = default;
  /*! \brief Duplicates are dropped. */
  explicit KgStore(std::vector<KgTriple> triples);

  /*! \throws ParseError */
  static KgStore Parse(std::string_view ntriples);
  /*! \throws IoError, ParseError */
  static KgStore Load(const std::filesystem::path& path);

  /*! \brief Sorted, duplicate-free. */
  const std::vector<KgTriple>& triples() const { return triples_; }
  std::size_t size() const { return triples_.size(); }
  /*! \brief Indices into triples() with the given subject. */
  const std::vector<std::size_t>& Outgoing(const std::string& node) const;
  /*! \brief Indices into triples() with the given object. */
  const std::vector<std::size_t>& Incoming(const std::string& node) const;
  bool Contains(const std::string& node) const;

 private:
  std::vector<KgTriple> triples_;
  std::unordered_map<std::string, std::vector<std::size_t>> out_;
  std::unordered_map<std::string, std::vector<std::size_t>> in_;
};

bool IsLiteralNode(std::string_view node);

enum class EdgeDirection { kForward, kBackward };

struct PathStep {
  std::string relation;
  EdgeDirection direction = EdgeDirection::kForward;
  /*! Node reached by this hop. */
  std::string node;

  friend bool operator==(const PathStep&, const PathStep&) = default;
  friend auto operator<=>(const PathStep&, const PathStep&) = default;
};

struct RelationPath {
  std::string start;
  std::vector<PathStep> steps;
  double score = 1.0;

  const std::string& terminal() const { return steps.empty() ? start : steps.back().node; }
  friend bool operator==(const RelationPath&, const RelationPath&) = default;
};

/*! \brief Retrieval order: score descending, then start, then steps lexicographically. */
bool PathBefore(const RelationPath& x, const RelationPath& y);

struct RetrievalOptions {
  std::size_t top_k = 20;
  double min_score = 1e-5;
  std::size_t max_hops = 2;
};

struct Subgraph {
  /*! Sorted by PathBefore. */
  std::vector<RelationPath> paths;
  std::set<std::string> relations;
  /*! UnknownEntity findings. */
  std::vector<std::string> warnings;
};

/*! \brief Local name after the last '/' or '#'. */
std::string_view RelationLocalName(std::string_view relation);

/*! \brief Lowercased tokens of the local name, split on non-alphanumerics and camelCase. */
std::set<std::string> LabelTokens(std::string_view relation);

/*! \brief Lowercased alphanumeric words of a question. */
std::set<std::string> QuestionTerms(std::string_view question);

/*! \brief (|label tokens n terms| + 0.01) / (|label tokens| + 0.01), in (0, 1]. */
double RelationRelevance(std::string_view relation, const std::set<std::string>& question_terms);

/*!
 * \brief Best-first expansion over simple paths of 1..max_hops edges in either direction from
 * each topic entity. Literal nodes end a path. A path scores the product of the relevance of
 * its relations; paths scoring below min_score are dropped and the first top_k are kept.
 * \throws std::invalid_argument when top_k or max_hops is 0
 */
Subgraph RetrieveSubgraph(const KgStore& store, const std::vector<std::string>& topic_entities,
                          const std::set<std::string>& question_terms,
                          const RetrievalOptions& options = {});

std::set<std::string> RelationsOf(const Subgraph& subgraph);

/*! \brief {"paths":[{"start","relations","directions","terminal","score"}],"relations":[...]} */
nlohmann::json SubgraphToJson(const Subgraph& subgraph);

}  // namespace kgsparql

#endif  // KGSPARQL_KG_STORE_H_
