/*!
 *  Copyright (c) 2024 by Contributors
 * \file src/sparql.cc
 * \brief Parser, serializer and canonicalizer for the SPARQL subset.
 */
#include "kgsparql/sparql.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kgsparql/error.h"
#include "sparql_lexer.h"

namespace kgsparql {

using detail::Tok;
using detail::TokKind;

/******************* Errors *******************/

namespace {

std::string JoinExpected(const std::vector<std::string>& expected) {
  std::string out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) out += ", ";
    out += expected[i];
  }
  return out;
}

std::string SyntaxMessage(std::size_t position, const std::vector<std::string>& expected,
                          const std::string& detail) {
  std::string msg = "syntax error at offset " + std::to_string(position);
  if (!detail.empty()) msg += ": " + detail;
  if (!expected.empty()) msg += " (expected one of {" + JoinExpected(expected) + "})";
  return msg;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t position, std::vector<std::string> expected,
                         const std::string& detail)
    : Error(SyntaxMessage(position, expected, detail)),
      position_(position),
      expected_(std::move(expected)) {}

UnsupportedError::UnsupportedError(std::string construct)
    : Error("unsupported construct: " + construct), construct_(std::move(construct)) {}

/******************* PrefixTable *******************/

namespace {

bool IsValidLabel(std::string_view label) {
  if (label.empty() || !std::isalpha(static_cast<unsigned char>(label.front()))) return false;
  return std::all_of(label.begin(), label.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

bool IsAbsoluteNamespace(std::string_view ns) {
  auto colon = ns.find(':');
  if (colon == std::string_view::npos || colon == 0) return false;
  if (!std::isalpha(static_cast<unsigned char>(ns.front()))) return false;
  for (std::size_t i = 0; i < colon; ++i) {
    char c = ns[i];
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '.' && c != '-') {
      return false;
    }
  }
  if (ns.find_first_of(" <>\"{}|^`\\") != std::string_view::npos) return false;
  return ns.back() == '/' || ns.back() == '#';
}

bool IsPlainLocalName(std::string_view local) {
  if (local.empty()) return false;
  char first = local.front();
  if (!std::isalnum(static_cast<unsigned char>(first)) && first != '_') return false;
  return std::all_of(local.begin(), local.end(), detail::IsLocalNameChar);
}

}  // namespace

PrefixTable PrefixTable::FromJson(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("prefix table: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("prefix table: expected a JSON object");
  PrefixTable table;
  for (const auto& [label, ns] : doc.items()) {
    if (!ns.is_string()) throw FormatError("prefix table: namespace of '" + label + "' is not a string");
    table.Add(label, ns.get<std::string>());
  }
  return table;
}

PrefixTable PrefixTable::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prefix table " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return FromJson(buf.str());
}

void PrefixTable::Add(const std::string& label, const std::string& ns) {
  if (!IsValidLabel(label)) throw FormatError("prefix table: invalid label '" + label + "'");
  if (!IsAbsoluteNamespace(ns)) {
    throw FormatError("prefix table: '" + ns + "' is not an absolute IRI ending in '/' or '#'");
  }
  if (entries_.count(label)) throw FormatError("prefix table: duplicate label '" + label + "'");
  for (const auto& [other_label, other_ns] : entries_) {
    if (ns.compare(0, other_ns.size(), other_ns) == 0 ||
        other_ns.compare(0, ns.size(), ns) == 0) {
      throw FormatError("prefix table: namespaces of '" + label + "' and '" + other_label +
                        "' overlap");
    }
  }
  entries_.emplace(label, ns);
}

std::optional<std::string> PrefixTable::Namespace(std::string_view label) const {
  auto it = entries_.find(std::string(label));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> PrefixTable::Compact(std::string_view iri) const {
  for (const auto& [label, ns] : entries_) {
    if (iri.size() > ns.size() && iri.compare(0, ns.size(), ns) == 0) {
      std::string_view local = iri.substr(ns.size());
      if (!IsPlainLocalName(local)) return std::nullopt;
      return label + ":" + std::string(local);
    }
  }
  return std::nullopt;
}

std::optional<std::string> PrefixTable::Expand(std::string_view prefixed_name) const {
  auto colon = prefixed_name.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto ns = Namespace(prefixed_name.substr(0, colon));
  if (!ns) return std::nullopt;
  return *ns + std::string(prefixed_name.substr(colon + 1));
}

/******************* Rendering *******************/

bool IsCanonicalVariableName(std::string_view name) {
  return name.size() > 3 && name.compare(0, 3, "var") == 0 &&
         name.find_first_not_of("0123456789", 3) == std::string_view::npos;
}

std::string ToString(const Term& term) {
  switch (term.kind) {
    case TermKind::kVariable:
      return IsCanonicalVariableName(term.text) ? term.text : "?" + term.text;
    case TermKind::kLiteral:
      return term.datatype ? term.text + "^^" + *term.datatype : term.text;
    default:
      return term.text;
  }
}

std::string ToString(const Expression& expr) {
  std::string out;
  for (const ExprToken& tok : expr.tokens) {
    if (!out.empty()) out += ' ';
    if (const Term* term = std::get_if<Term>(&tok)) {
      out += ToString(*term);
    } else {
      out += std::get<std::string>(tok);
    }
  }
  return out;
}

std::string_view ToString(AggregateFunction fn) {
  switch (fn) {
    case AggregateFunction::kCount: return "count";
    case AggregateFunction::kMin: return "min";
    case AggregateFunction::kMax: return "max";
    case AggregateFunction::kSum: return "sum";
    case AggregateFunction::kAvg: return "avg";
  }
  return "count";
}

namespace {

std::size_t CountTriples(const std::vector<Pattern>& patterns) {
  return std::count_if(patterns.begin(), patterns.end(), [](const Pattern& p) {
    return std::holds_alternative<TriplePattern>(p);
  });
}

}  // namespace

std::string Serialize(const QueryAst& ast) {
  std::string out;
  auto emit = [&out](std::string_view s) {
    if (!out.empty()) out += ' ';
    out += s;
  };

  if (ast.form == QueryForm::kAsk) {
    emit("ask");
  } else {
    emit("select");
    if (ast.distinct) emit("distinct");
    if (const auto* vars = std::get_if<std::vector<Term>>(&ast.projection)) {
      for (const Term& v : *vars) emit(ToString(v));
    } else {
      const auto& agg = std::get<AggregateProjection>(ast.projection);
      emit("(");
      emit(ToString(agg.function));
      emit("(");
      emit(ToString(agg.inner));
      emit(")");
      emit("as");
      emit(ToString(agg.alias));
      emit(")");
    }
  }
  emit("where");
  emit("{");
  bool dotted = CountTriples(ast.patterns) >= 2;
  for (const Pattern& p : ast.patterns) {
    if (const auto* t = std::get_if<TriplePattern>(&p)) {
      emit(ToString(t->subject));
      emit(ToString(t->predicate));
      emit(ToString(t->object));
      if (dotted) emit(".");
    } else {
      emit("filter");
      emit(ToString(std::get<FilterClause>(p).expr));
    }
  }
  emit("}");

  for (const Modifier& m : ast.modifiers) {
    if (const auto* order = std::get_if<OrderBy>(&m)) {
      emit("order");
      emit("by");
      if (order->direction) emit(*order->direction == SortDirection::kAsc ? "asc" : "desc");
      if (const Term* v = std::get_if<Term>(&order->key)) {
        emit(ToString(*v));
      } else {
        emit(ToString(std::get<Expression>(order->key)));
      }
    } else if (const auto* group = std::get_if<GroupBy>(&m)) {
      emit("group");
      emit("by");
      for (const Term& v : group->vars) emit(ToString(v));
    } else if (const auto* having = std::get_if<Having>(&m)) {
      emit("having");
      emit(ToString(having->expr));
    } else if (const auto* limit = std::get_if<Limit>(&m)) {
      emit("limit");
      emit(std::to_string(limit->n));
    } else {
      emit("offset");
      emit(std::to_string(std::get<Offset>(m).n));
    }
  }
  return out;
}

/******************* AST invariants *******************/

void CheckAst(const QueryAst& ast) {
  auto fail = [](const std::string& detail) { throw SyntaxError(0, {}, detail); };

  std::set<std::string> bound;
  for (const Pattern& p : ast.patterns) {
    const auto* t = std::get_if<TriplePattern>(&p);
    if (!t) continue;
    if (t->subject.kind == TermKind::kLiteral) fail("literal in subject position");
    if (t->predicate.kind == TermKind::kLiteral) fail("literal in predicate position");
    for (const Term* term : {&t->subject, &t->predicate, &t->object}) {
      if (term->text.empty()) fail("empty term");
      if (term->is_variable()) bound.insert(term->text);
    }
  }
  if (CountTriples(ast.patterns) == 0) fail("group graph pattern has no triple pattern");

  auto require_bound = [&](const Term& v, const char* where) {
    if (!v.is_variable()) fail(std::string("non-variable in ") + where);
    if (!bound.count(v.text)) {
      fail("variable " + ToString(v) + " in " + where + " does not occur in any triple pattern");
    }
  };

  std::optional<std::string> alias;
  if (ast.form == QueryForm::kAsk) {
    const auto* vars = std::get_if<std::vector<Term>>(&ast.projection);
    if (!vars || !vars->empty() || ast.distinct) fail("ask query with a projection");
    if (!ast.modifiers.empty()) fail("ask query with solution modifiers");
  } else if (const auto* vars = std::get_if<std::vector<Term>>(&ast.projection)) {
    if (vars->empty()) fail("empty projection");
    for (const Term& v : *vars) require_bound(v, "projection");
  } else {
    const auto& agg = std::get<AggregateProjection>(ast.projection);
    if (ast.distinct) fail("distinct with aggregate projection");
    require_bound(agg.inner, "aggregate");
    if (!agg.alias.is_variable()) fail("aggregate alias is not a variable");
    if (agg.alias == agg.inner) fail("aggregate alias equals its argument");
    alias = agg.alias.text;
  }

  for (const Modifier& m : ast.modifiers) {
    if (const auto* order = std::get_if<OrderBy>(&m)) {
      if (const Term* v = std::get_if<Term>(&order->key)) {
        if (!(v->is_variable() && alias && *alias == v->text)) require_bound(*v, "order by");
      } else if (std::get<Expression>(order->key).tokens.empty()) {
        fail("empty sort expression");
      }
    } else if (const auto* group = std::get_if<GroupBy>(&m)) {
      if (group->vars.empty()) fail("empty group by");
      for (const Term& v : group->vars) require_bound(v, "group by");
    } else if (const auto* having = std::get_if<Having>(&m)) {
      if (having->expr.tokens.empty()) fail("empty having expression");
    }
  }
  for (const Pattern& p : ast.patterns) {
    if (const auto* f = std::get_if<FilterClause>(&p); f && f->expr.tokens.empty()) {
      fail("empty filter expression");
    }
  }
}

/******************* Parser *******************/

namespace {

const std::set<std::string> kUnsupportedGroupWords = {"optional", "union", "minus", "graph",
                                                      "service", "bind", "values"};

class Parser {
 public:
  Parser(std::string_view text, const PrefixTable& table) : toks_(detail::Lex(text)), table_(table) {}

  QueryAst Parse() {
    ParsePrologue();
    QueryAst ast;
    const Tok& head = Peek();
    if (IsWord(head, "select")) {
      Take();
      ast.form = QueryForm::kSelect;
      ParseSelectClause(ast);
    } else if (IsWord(head, "ask")) {
      Take();
      ast.form = QueryForm::kAsk;
      ast.projection = std::vector<Term>{};
    } else if (IsWord(head, "construct") || IsWord(head, "describe")) {
      throw UnsupportedError(head.text + " query");
    } else {
      Fail(head, {"select", "ask"});
    }

    if (IsWord(Peek(), "where")) {
      Take();
    } else if (!IsPunct(Peek(), "{")) {
      Fail(Peek(), {"where"});
    }
    ParseGroup(ast);

    if (ast.form == QueryForm::kSelect) ParseModifiers(ast);
    if (IsWord(Peek(), "values")) throw UnsupportedError("values");
    if (Peek().kind != TokKind::kEnd) Fail(Peek(), {"end of input"});
    CheckAst(ast);
    return ast;
  }

 private:
  const Tok& Peek(std::size_t k = 0) const {
    return toks_[std::min(i_ + k, toks_.size() - 1)];
  }
  const Tok& Take() {
    const Tok& t = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    return t;
  }

  static bool IsWord(const Tok& t, std::string_view w) {
    return t.kind == TokKind::kWord && t.text == w;
  }
  static bool IsPunct(const Tok& t, std::string_view p) {
    return t.kind == TokKind::kPunct && t.text == p;
  }

  [[noreturn]] void Fail(const Tok& at, std::vector<std::string> expected) const {
    std::string found = at.kind == TokKind::kEnd ? "end of input" : "'" + at.text + "'";
    throw SyntaxError(at.pos, std::move(expected), "unexpected " + found);
  }

  void Expect(std::string_view punct) {
    if (!IsPunct(Peek(), punct)) Fail(Peek(), {std::string(punct)});
    Take();
  }

  void ExpectWord(std::string_view word) {
    if (!IsWord(Peek(), word)) Fail(Peek(), {std::string(word)});
    Take();
  }

  void ParsePrologue() {
    while (true) {
      const Tok& t = Peek();
      if (IsWord(t, "base")) throw UnsupportedError("base");
      if (!IsWord(t, "prefix")) return;
      Take();
      const Tok& name = Take();
      if (name.kind != TokKind::kPrefixedName || !name.local.empty()) Fail(name, {"prefix label"});
      const Tok& iri = Take();
      if (iri.kind != TokKind::kIriRef) Fail(iri, {"IRI"});
      declared_[name.label] = iri.text.substr(1, iri.text.size() - 2);
    }
  }

  Term ResolvePrefixed(const Tok& t) {
    if (t.label == "_") throw UnsupportedError("blank node");
    if (auto it = declared_.find(t.label); it != declared_.end()) {
      return Term::Iri("<" + it->second + t.local + ">");
    }
    if (!table_.empty() && !table_.Namespace(t.label)) {
      throw SyntaxError(t.pos, {}, "undeclared prefix '" + t.label + ":'");
    }
    if (t.escaped) {
      auto ns = table_.Namespace(t.label);
      if (!ns) throw SyntaxError(t.pos, {}, "escaped local name with unknown namespace");
      return Term::Iri("<" + *ns + t.local + ">");
    }
    return Term::Iri(t.text);
  }

  Term ResolveDatatype(const std::optional<std::string>& dt, std::size_t pos) {
    if (!dt) return {};
    if (dt->front() == '<') return Term::Iri(*dt);
    Tok fake;
    fake.pos = pos;
    fake.text = *dt;
    auto colon = dt->find(':');
    fake.label = dt->substr(0, colon);
    fake.local = dt->substr(colon + 1);
    return ResolvePrefixed(fake);
  }

  // Converts one value-like token to a Term, or nullopt when it is not a term.
  std::optional<Term> AsTerm(const Tok& t) {
    switch (t.kind) {
      case TokKind::kVariable: return Term::Variable(t.text);
      case TokKind::kIriRef: return Term::Iri(t.text);
      case TokKind::kPrefixedName: return ResolvePrefixed(t);
      case TokKind::kNumber: return Term::Literal(t.text);
      case TokKind::kLiteral: {
        Term lit = Term::Literal(t.text);
        if (t.datatype) lit.datatype = ResolveDatatype(t.datatype, t.pos).text;
        return lit;
      }
      case TokKind::kWord:
        if (t.text == "true" || t.text == "false") return Term::Literal(t.text);
        return std::nullopt;
      default:
        return std::nullopt;
    }
  }

  Term ExpectVariable() {
    const Tok& t = Peek();
    if (t.kind != TokKind::kVariable) Fail(t, {"variable"});
    Take();
    return Term::Variable(t.text);
  }

  void ParseSelectClause(QueryAst& ast) {
    if (IsWord(Peek(), "distinct")) {
      Take();
      ast.distinct = true;
    } else if (IsWord(Peek(), "reduced")) {
      throw UnsupportedError("reduced");
    }
    if (IsPunct(Peek(), "*")) throw UnsupportedError("select *");

    if (IsPunct(Peek(), "(")) {
      if (ast.distinct) Fail(Peek(), {"variable"});
      ast.projection = ParseAggregate();
      if (Peek().kind == TokKind::kVariable || IsPunct(Peek(), "(")) {
        throw UnsupportedError("projection mixing aggregates and variables");
      }
      return;
    }
    std::vector<Term> vars;
    if (Peek().kind != TokKind::kVariable) {
      std::vector<std::string> expected = {"variable", "("};
      if (!ast.distinct) expected.insert(expected.begin(), "distinct");
      Fail(Peek(), std::move(expected));
    }
    while (Peek().kind == TokKind::kVariable) vars.push_back(ExpectVariable());
    if (IsPunct(Peek(), "(")) throw UnsupportedError("projection mixing aggregates and variables");
    ast.projection = std::move(vars);
  }

  AggregateProjection ParseAggregate() {
    Expect("(");
    const Tok& fn = Peek();
    AggregateProjection agg;
    static const std::pair<std::string_view, AggregateFunction> kFns[] = {
        {"count", AggregateFunction::kCount}, {"min", AggregateFunction::kMin},
        {"max", AggregateFunction::kMax},     {"sum", AggregateFunction::kSum},
        {"avg", AggregateFunction::kAvg}};
    bool found = false;
    for (const auto& [name, value] : kFns) {
      if (IsWord(fn, name)) {
        agg.function = value;
        found = true;
      }
    }
    if (!found) {
      if (fn.kind == TokKind::kWord) throw UnsupportedError("aggregate " + fn.text);
      Fail(fn, {"count", "min", "max", "sum", "avg"});
    }
    Take();
    Expect("(");
    if (IsWord(Peek(), "distinct")) throw UnsupportedError("distinct inside aggregate");
    if (IsPunct(Peek(), "*")) throw UnsupportedError("count(*)");
    agg.inner = ExpectVariable();
    Expect(")");
    ExpectWord("as");
    agg.alias = ExpectVariable();
    Expect(")");
    return agg;
  }

  void ParseGroup(QueryAst& ast) {
    Expect("{");
    while (!IsPunct(Peek(), "}")) {
      const Tok& t = Peek();
      if (t.kind == TokKind::kEnd) Fail(t, {"}"});
      if (IsWord(t, "filter")) {
        Take();
        ast.patterns.push_back(FilterClause{ParseConstraintExpr()});
        if (IsPunct(Peek(), ".")) Take();
      } else if (t.kind == TokKind::kWord && kUnsupportedGroupWords.count(t.text)) {
        throw UnsupportedError(t.text);
      } else if (IsPunct(t, "{")) {
        throw UnsupportedError("nested group pattern");
      } else {
        ParseTriplesBlock(ast.patterns);
      }
    }
    Take();
    if (IsWord(Peek(), "union")) throw UnsupportedError("union");
  }

  Term ParseSubject() {
    const Tok& t = Peek();
    if (IsPunct(t, "[")) throw UnsupportedError("blank node");
    if (IsPunct(t, "(")) throw UnsupportedError("collection");
    if (t.kind == TokKind::kVariable || t.kind == TokKind::kIriRef ||
        t.kind == TokKind::kPrefixedName) {
      Take();
      return *AsTerm(t);
    }
    Fail(t, {"variable", "IRI", "filter", "}"});
  }

  Term ParsePredicate() {
    const Tok& t = Peek();
    if (IsPunct(t, "^") || IsPunct(t, "!") || IsPunct(t, "(")) {
      throw UnsupportedError("property path");
    }
    Term pred;
    if (IsWord(t, "a")) {
      Take();
      pred = Term::Iri("<" + std::string(kRdfTypeIri) + ">");
    } else if (t.kind == TokKind::kVariable || t.kind == TokKind::kIriRef ||
               t.kind == TokKind::kPrefixedName) {
      Take();
      pred = *AsTerm(t);
    } else {
      Fail(t, {"variable", "IRI", "a"});
    }
    const Tok& next = Peek();
    if (next.kind == TokKind::kPunct &&
        (next.text == "/" || next.text == "|" || next.text == "*" || next.text == "+" ||
         next.text == "?" || next.text == "^")) {
      throw UnsupportedError("property path");
    }
    return pred;
  }

  Term ParseObject() {
    const Tok& t = Peek();
    if (IsPunct(t, "[")) throw UnsupportedError("blank node");
    if (IsPunct(t, "(")) throw UnsupportedError("collection");
    if (auto term = AsTerm(t)) {
      Take();
      return *term;
    }
    Fail(t, {"variable", "IRI", "literal"});
  }

  void ParseTriplesBlock(std::vector<Pattern>& out) {
    Term subject = ParseSubject();
    while (true) {
      Term predicate = ParsePredicate();
      while (true) {
        out.push_back(TriplePattern{subject, predicate, ParseObject()});
        if (!IsPunct(Peek(), ",")) break;
        Take();
      }
      if (!IsPunct(Peek(), ";")) break;
      while (IsPunct(Peek(), ";")) Take();
      if (IsPunct(Peek(), ".") || IsPunct(Peek(), "}")) break;
    }
    if (IsPunct(Peek(), ".")) Take();
  }

  // Appends "( ... )" with balanced parentheses, outer pair included.
  void ParseBracketed(Expression& expr) {
    if (!IsPunct(Peek(), "(")) Fail(Peek(), {"("});
    int depth = 0;
    do {
      const Tok& t = Peek();
      if (t.kind == TokKind::kEnd) Fail(t, {")"});
      if (IsPunct(t, "{") || IsPunct(t, "}")) throw UnsupportedError("graph pattern inside expression");
      if (IsPunct(t, "(")) ++depth;
      if (IsPunct(t, ")")) --depth;
      Take();
      if (auto term = AsTerm(t)) {
        expr.tokens.emplace_back(std::move(*term));
      } else {
        expr.tokens.emplace_back(t.text);
      }
    } while (depth > 0);
  }

  // Bracketed expression or function call "name ( ... )".
  Expression ParseConstraintExpr() {
    Expression expr;
    const Tok& t = Peek();
    if (IsPunct(t, "(")) {
      ParseBracketed(expr);
    } else if ((t.kind == TokKind::kWord || t.kind == TokKind::kPrefixedName ||
                t.kind == TokKind::kIriRef) &&
               IsPunct(Peek(1), "(")) {
      if (t.kind == TokKind::kWord && (t.text == "exists" || t.text == "not")) {
        throw UnsupportedError("exists");
      }
      Take();
      if (t.kind == TokKind::kWord) {
        expr.tokens.emplace_back(t.text);
      } else {
        expr.tokens.emplace_back(*AsTerm(t));
      }
      ParseBracketed(expr);
    } else if (IsWord(t, "not") || IsWord(t, "exists")) {
      throw UnsupportedError("exists");
    } else {
      Fail(t, {"(", "function call"});
    }
    return expr;
  }

  std::uint64_t ExpectInteger() {
    const Tok& t = Peek();
    if (t.kind != TokKind::kNumber || t.text.find_first_not_of("0123456789") != std::string::npos) {
      Fail(t, {"integer"});
    }
    Take();
    try {
      return std::stoull(t.text);
    } catch (const std::out_of_range&) {
      throw SyntaxError(t.pos, {"integer"}, "integer out of range");
    }
  }

  void ParseModifiers(QueryAst& ast) {
    while (true) {
      const Tok& t = Peek();
      if (IsWord(t, "order")) {
        Take();
        ExpectWord("by");
        ast.modifiers.emplace_back(ParseOrderKey());
        const Tok& next = Peek();
        if (next.kind == TokKind::kVariable || IsPunct(next, "(") || IsWord(next, "asc") ||
            IsWord(next, "desc")) {
          throw UnsupportedError("multiple sort keys");
        }
      } else if (IsWord(t, "group")) {
        Take();
        ExpectWord("by");
        GroupBy group;
        if (IsPunct(Peek(), "(")) throw UnsupportedError("group by expression");
        group.vars.push_back(ExpectVariable());
        while (Peek().kind == TokKind::kVariable) group.vars.push_back(ExpectVariable());
        if (IsPunct(Peek(), "(")) throw UnsupportedError("group by expression");
        ast.modifiers.emplace_back(std::move(group));
      } else if (IsWord(t, "having")) {
        Take();
        ast.modifiers.emplace_back(Having{ParseConstraintExpr()});
      } else if (IsWord(t, "limit")) {
        Take();
        ast.modifiers.emplace_back(Limit{ExpectInteger()});
      } else if (IsWord(t, "offset")) {
        Take();
        ast.modifiers.emplace_back(Offset{ExpectInteger()});
      } else {
        return;
      }
    }
  }

  OrderBy ParseOrderKey() {
    OrderBy order;
    if (IsWord(Peek(), "asc") || IsWord(Peek(), "desc")) {
      order.direction = IsWord(Take(), "asc") ? SortDirection::kAsc : SortDirection::kDesc;
    }
    const Tok& t = Peek();
    if (t.kind == TokKind::kVariable) {
      order.key = ExpectVariable();
    } else if (IsPunct(t, "(") || IsPunct(Peek(1), "(")) {
      order.key = ParseConstraintExpr();
    } else {
      Fail(t, {"variable", "("});
    }
    return order;
  }

  std::vector<Tok> toks_;
  std::size_t i_ = 0;
  const PrefixTable& table_;
  std::map<std::string, std::string> declared_;
};

}  // namespace

QueryAst ParseSparql(std::string_view text, const PrefixTable& prefixes) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw SyntaxError(text.size(), {"select", "ask"}, "empty query");
  }
  return Parser(text, prefixes).Parse();
}

/******************* Canonicalization *******************/

namespace {

// Visits every term in serialization order.
template <typename Fn>
void ForEachTerm(QueryAst& ast, Fn&& fn) {
  auto visit_expr = [&fn](Expression& expr) {
    for (ExprToken& tok : expr.tokens) {
      if (Term* term = std::get_if<Term>(&tok)) fn(*term);
    }
  };
  if (auto* vars = std::get_if<std::vector<Term>>(&ast.projection)) {
    for (Term& v : *vars) fn(v);
  } else {
    auto& agg = std::get<AggregateProjection>(ast.projection);
    fn(agg.inner);
    fn(agg.alias);
  }
  for (Pattern& p : ast.patterns) {
    if (auto* t = std::get_if<TriplePattern>(&p)) {
      fn(t->subject);
      fn(t->predicate);
      fn(t->object);
    } else {
      visit_expr(std::get<FilterClause>(p).expr);
    }
  }
  for (Modifier& m : ast.modifiers) {
    if (auto* order = std::get_if<OrderBy>(&m)) {
      if (auto* v = std::get_if<Term>(&order->key)) {
        fn(*v);
      } else {
        visit_expr(std::get<Expression>(order->key));
      }
    } else if (auto* group = std::get_if<GroupBy>(&m)) {
      for (Term& v : group->vars) fn(v);
    } else if (auto* having = std::get_if<Having>(&m)) {
      visit_expr(having->expr);
    }
  }
}

}  // namespace

CanonicalQuery FromAst(QueryAst ast) {
  CanonicalQuery q;
  ForEachTerm(ast, [&q](Term& t) {
    if (t.is_variable()) q.var_map.emplace(t.text, t.text);
  });
  q.text = Serialize(ast);
  q.ast = std::move(ast);
  return q;
}

CanonicalQuery Canonicalize(std::string_view text, const PrefixTable& prefixes) {
  QueryAst ast = ParseSparql(text, prefixes);
  CanonicalQuery q;
  std::set<std::string> warned;

  auto compact = [&](std::string& surface) {
    if (surface.empty() || surface.front() != '<') return;
    std::string_view iri(surface);
    iri = iri.substr(1, iri.size() - 2);
    if (auto prefixed = prefixes.Compact(iri)) {
      surface = *prefixed;
      return;
    }
    bool namespace_known = std::any_of(
        prefixes.entries().begin(), prefixes.entries().end(),
        [&](const auto& entry) { return iri.compare(0, entry.second.size(), entry.second) == 0; });
    if (!namespace_known && warned.insert(surface).second) {
      q.warnings.push_back("UnknownNamespace: " + surface);
    }
  };

  ForEachTerm(ast, [&](Term& t) {
    if (t.kind == TermKind::kFullIri) {
      compact(t.text);
      if (t.text.front() != '<') t.kind = TermKind::kPrefixedIri;
    } else if (t.kind == TermKind::kLiteral && t.datatype) {
      compact(*t.datatype);
    }
  });

  ForEachTerm(ast, [&](Term& t) {
    if (!t.is_variable()) return;
    std::string next = "var" + std::to_string(q.var_map.size());
    t.text = q.var_map.try_emplace(t.text, std::move(next)).first->second;
  });

  q.text = Serialize(ast);
  q.ast = std::move(ast);
  return q;
}

}  // namespace kgsparql
