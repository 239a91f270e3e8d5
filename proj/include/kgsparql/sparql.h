/*!
 *  Copyright (c) 2024 by Contributors
 * \file kgsparql/sparql.h
 * \brief A SPARQL subset: AST, parser, serializer and canonicalization.
 *
 * The subset covers SELECT/ASK queries over basic graph patterns with FILTER, a single
 * aggregate projection, and ORDER BY / GROUP BY / HAVING / LIMIT / OFFSET. Anything else
 * (UNION, OPTIONAL, property paths, subqueries, blank nodes) raises UnsupportedError.
 *
 * Canonical text is lowercase in keywords only, separates every token by one space, names
 * variables var0, var1, ... in order of first appearance and writes IRIs in prefixed form
 * whenever the prefix table allows it.
 */
#ifndef KGSPARQL_SPARQL_H_
#define KGSPARQL_SPARQL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kgsparql {

/*!
 * \brief Prefix label -> namespace IRI.
 *
 * Namespaces are absolute IRIs ending in '/' or '#', and no namespace is a prefix of another,
 * so compaction of any IRI has at most one candidate.
 */
class PrefixTable {
 public:
  PrefixTable() = default;

  /*! \brief Parse {"dbr": "http://dbpedia.org/resource/", ...}. Throws FormatError. */
  static PrefixTable FromJson(std::string_view json_text);
  static PrefixTable Load(const std::filesystem::path& path);

  /*! \brief Throws FormatError if the entry would break a table invariant. */
  void Add(const std::string& label, const std::string& ns);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::optional<std::string> Namespace(std::string_view label) const;

  /*!
   * \brief "label:local" for an IRI (without angle brackets) under a known namespace, or
   * nullopt when no namespace matches or the local part is not a plain local name.
   */
  std::optional<std::string> Compact(std::string_view iri) const;

  /*! \brief Inverse of Compact for known labels. */
  std::optional<std::string> Expand(std::string_view prefixed_name) const;

 private:
  std::map<std::string, std::string> entries_;
};

enum class TermKind : std::uint8_t { kVariable, kPrefixedIri, kFullIri, kLiteral };

/*!
 * \brief An RDF term or variable as it appears in a query.
 *
 * text holds the surface form without datatype: the variable name without '?',
 * "dbr:Apple_Inc.", "<http://...>", "\"chat\"@fr" or "2000". datatype is the surface of the
 * datatype IRI of a typed literal ("xsd:gYear" or "<http://...>").
 */
struct Term {
  TermKind kind = TermKind::kVariable;
  std::string text;
  std::optional<std::string> datatype;

  static Term Variable(std::string name) { return {TermKind::kVariable, std::move(name), {}}; }
  static Term Iri(std::string text) {
    TermKind kind = !text.empty() && text.front() == '<' ? TermKind::kFullIri
                                                         : TermKind::kPrefixedIri;
    return {kind, std::move(text), {}};
  }
  static Term Literal(std::string text, std::optional<std::string> datatype = std::nullopt) {
    return {TermKind::kLiteral, std::move(text), std::move(datatype)};
  }

  bool is_variable() const { return kind == TermKind::kVariable; }
  bool is_iri() const { return kind == TermKind::kPrefixedIri || kind == TermKind::kFullIri; }

  friend bool operator==(const Term&, const Term&) = default;
};

/*! \brief Surface form of a term as it appears in canonical text. */
std::string ToString(const Term& term);

/*! \brief Either a term or an operator / punctuation / function-name word. */
using ExprToken = std::variant<Term, std::string>;

/*!
 * \brief Opaque balanced-token span: "( var1 > 2000 )" or "contains ( str ( var0 ) , \"x\" )".
 */
struct Expression {
  std::vector<ExprToken> tokens;

  friend bool operator==(const Expression&, const Expression&) = default;
};

std::string ToString(const Expression& expr);

struct TriplePattern {
  Term subject;
  Term predicate;
  Term object;

  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

struct FilterClause {
  Expression expr;

  friend bool operator==(const FilterClause&, const FilterClause&) = default;
};

using Pattern = std::variant<TriplePattern, FilterClause>;

enum class AggregateFunction : std::uint8_t { kCount, kMin, kMax, kSum, kAvg };

std::string_view ToString(AggregateFunction fn);

struct AggregateProjection {
  AggregateFunction function = AggregateFunction::kCount;
  Term inner;
  Term alias;

  friend bool operator==(const AggregateProjection&, const AggregateProjection&) = default;
};

enum class SortDirection : std::uint8_t { kAsc, kDesc };

struct OrderBy {
  std::optional<SortDirection> direction;
  /*! A bare variable or a complex sort expression. */
  std::variant<Term, Expression> key;

  friend bool operator==(const OrderBy&, const OrderBy&) = default;
};

struct GroupBy {
  std::vector<Term> vars;

  friend bool operator==(const GroupBy&, const GroupBy&) = default;
};

struct Having {
  Expression expr;

  friend bool operator==(const Having&, const Having&) = default;
};

struct Limit {
  std::uint64_t n = 0;

  friend bool operator==(const Limit&, const Limit&) = default;
};

struct Offset {
  std::uint64_t n = 0;

  friend bool operator==(const Offset&, const Offset&) = default;
};

using Modifier = std::variant<OrderBy, GroupBy, Having, Limit, Offset>;

enum class QueryForm : std::uint8_t { kSelect, kAsk };

using Projection = std::variant<std::vector<Term>, AggregateProjection>;

/*!
 * \brief Parsed query.
 *
 * Invariants: patterns contain at least one triple; ASK has an empty variable projection and
 * no modifiers; projected, grouped and sort variables occur in some triple pattern (a sort
 * variable may also be the aggregate alias).
 */
struct QueryAst {
  QueryForm form = QueryForm::kSelect;
  bool distinct = false;
  Projection projection;
  std::vector<Pattern> patterns;
  std::vector<Modifier> modifiers;

  friend bool operator==(const QueryAst&, const QueryAst&) = default;
};

/*! \brief Throws SyntaxError when `ast` violates a QueryAst invariant. */
void CheckAst(const QueryAst& ast);

/*!
 * \brief Parse the supported SPARQL subset.
 *
 * PREFIX declarations in the text are expanded to full IRIs. With a non-empty `prefixes`
 * table, prefixed names must use a declared or table label; an empty table accepts any
 * label. The keyword `a` becomes the full rdf:type IRI.
 *
 * \throws SyntaxError, UnsupportedError
 */
QueryAst ParseSparql(std::string_view text, const PrefixTable& prefixes = {});

/*! \brief Deterministic canonical rendering; ParseSparql(Serialize(a)) == a. */
std::string Serialize(const QueryAst& ast);

struct CanonicalQuery {
  std::string text;
  QueryAst ast;
  /*! original variable name -> canonical name */
  std::map<std::string, std::string> var_map;
  /*! Non-fatal findings, e.g. "UnknownNamespace: <http://...>". */
  std::vector<std::string> warnings;
};

/*!
 * \brief Normalize a raw query: lowercase keywords, compact IRIs, rename variables by first
 * appearance and re-serialize. Idempotent.
 */
CanonicalQuery Canonicalize(std::string_view text, const PrefixTable& prefixes);

/*! \brief Wrap an already-canonical AST (identity variable map). */
CanonicalQuery FromAst(QueryAst ast);

/*! \brief True for names of the form var<N>. */
bool IsCanonicalVariableName(std::string_view name);

inline constexpr std::string_view kRdfTypeIri = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

}  // namespace kgsparql

#endif  // KGSPARQL_SPARQL_H_
