/*!
 *  Copyright (c) 2024 by Contributors
 * \file src/scaffold.cc
 */
#include "kgsparql/scaffold.h"

#include <algorithm>
#include <cctype>

namespace kgsparql {

/******************* Content text form *******************/

std::string ContentAssignment::ToString() const {
  std::string out;
  for (const ContentPair& p : pairs) {
    if (!out.empty()) out += ' ';
    out += kgsparql::ToString(p.tag);
    out += ' ';
    out += p.value;
  }
  return out;
}

std::vector<Placeholder> ContentAssignment::Tags() const {
  std::vector<Placeholder> tags;
  tags.reserve(pairs.size());
  for (const ContentPair& p : pairs) tags.push_back(p.tag);
  return tags;
}

namespace {

// Whitespace-separated words; whitespace inside quoted literals does not split.
std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quote) {
      cur.push_back(c);
      if (c == '\\' && i + 1 < text.size()) {
        cur.push_back(text[++i]);
      } else if (c == quote) {
        quote = 0;
      }
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      if (c == '"' || c == '\'') quote = c;
      cur.push_back(c);
    }
  }
  if (quote) throw FormatError("content: unterminated string literal");
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

}  // namespace

ContentAssignment ParseContent(std::string_view text) {
  ContentAssignment content;
  for (std::string& word : SplitWords(text)) {
    if (auto tag = ParsePlaceholder(word)) {
      if (!content.pairs.empty() && content.pairs.back().value.empty()) {
        throw FormatError("content: placeholder " + std::string(ToString(content.pairs.back().tag)) +
                          " has no value");
      }
      content.pairs.push_back({*tag, {}});
      continue;
    }
    if (content.pairs.empty()) throw FormatError("content: must start with a placeholder tag");
    std::string& value = content.pairs.back().value;
    if (!value.empty()) value += ' ';
    value += word;
  }
  if (!content.pairs.empty() && content.pairs.back().value.empty()) {
    throw FormatError("content: placeholder " + std::string(ToString(content.pairs.back().tag)) +
                      " has no value");
  }
  return content;
}

/******************* Decompose *******************/

namespace {

bool IsRdfType(const Term& predicate) {
  return predicate.text == "rdf:type" ||
         predicate.text == "<" + std::string(kRdfTypeIri) + ">";
}

class Decomposer {
 public:
  explicit Decomposer(const OntologySnapshot* ontology) : ontology_(ontology) {}

  Decomposition Run(const QueryAst& ast) {
    if (ast.form == QueryForm::kAsk) {
      Keyword("ask");
    } else {
      Keyword("select");
      if (ast.distinct) Keyword("distinct");
      if (const auto* vars = std::get_if<std::vector<Term>>(&ast.projection)) {
        for (const Term& v : *vars) Fill(Placeholder::kVar, ToString(v));
      } else {
        const auto& agg = std::get<AggregateProjection>(ast.projection);
        Keyword("(");
        Keyword(ToString(agg.function));
        Keyword("(");
        Fill(Placeholder::kVar, ToString(agg.inner));
        Keyword(")");
        Keyword("as");
        Fill(Placeholder::kVar, ToString(agg.alias));
        Keyword(")");
      }
    }
    Keyword("where");
    Keyword("{");
    std::size_t triples = std::count_if(ast.patterns.begin(), ast.patterns.end(), [](const Pattern& p) {
      return std::holds_alternative<TriplePattern>(p);
    });
    for (const Pattern& p : ast.patterns) {
      if (const auto* t = std::get_if<TriplePattern>(&p)) {
        Triple(*t);
        if (triples >= 2) Keyword(".");
      } else {
        Keyword("filter");
        Fill(Placeholder::kCon, ToString(std::get<FilterClause>(p).expr));
      }
    }
    Keyword("}");

    for (const Modifier& m : ast.modifiers) {
      if (const auto* order = std::get_if<OrderBy>(&m)) {
        Keyword("order");
        Keyword("by");
        if (order->direction) Keyword(*order->direction == SortDirection::kAsc ? "asc" : "desc");
        if (const Term* v = std::get_if<Term>(&order->key)) {
          Fill(Placeholder::kVar, ToString(*v));
        } else {
          Fill(Placeholder::kCon, ToString(std::get<Expression>(order->key)));
        }
      } else if (const auto* group = std::get_if<GroupBy>(&m)) {
        Keyword("group");
        Keyword("by");
        for (const Term& v : group->vars) Fill(Placeholder::kVar, ToString(v));
      } else if (const auto* having = std::get_if<Having>(&m)) {
        Keyword("having");
        Fill(Placeholder::kCon, ToString(having->expr));
      } else if (const auto* limit = std::get_if<Limit>(&m)) {
        Keyword("limit");
        Fill(Placeholder::kVal, std::to_string(limit->n));
      } else {
        Keyword("offset");
        Fill(Placeholder::kVal, std::to_string(std::get<Offset>(m).n));
      }
    }
    return std::move(out_);
  }

 private:
  void Keyword(std::string_view text) { out_.structure.tokens.push_back(StructureToken::Parse(text)); }

  void Fill(Placeholder tag, std::string value) {
    out_.structure.tokens.push_back(StructureToken::Of(tag));
    out_.content.pairs.push_back({tag, std::move(value)});
  }

  std::optional<LabelKind> Lookup(const Term& t) const {
    if (!ontology_) return std::nullopt;
    return ontology_->Classify(t.text);
  }

  void Ambiguity(const Term& t, std::string_view slot, Placeholder chosen) {
    out_.warnings.push_back("ClassificationAmbiguity: " + ToString(t) + " in " + std::string(slot) +
                            " position resolved as " + std::string(kgsparql::ToString(chosen)));
  }

  Placeholder Node(const Term& t, bool object_of_type, std::string_view slot) {
    if (t.is_variable()) return Placeholder::kVar;
    if (t.kind == TermKind::kLiteral) return Placeholder::kVal;
    Placeholder positional = object_of_type ? Placeholder::kCct : Placeholder::kEnt;
    auto kind = Lookup(t);
    if (!kind) return positional;
    switch (*kind) {
      case LabelKind::kConcept:
        return Placeholder::kCct;
      case LabelKind::kEntity:
        if (positional != Placeholder::kEnt) Ambiguity(t, slot, Placeholder::kEnt);
        return Placeholder::kEnt;
      case LabelKind::kRelation:
        Ambiguity(t, slot, positional);
        return positional;
    }
    return positional;
  }

  void Triple(const TriplePattern& t) {
    Fill(Node(t.subject, false, "subject"), ToString(t.subject));
    if (t.predicate.is_variable()) throw UnsupportedError("variable predicate");
    if (auto kind = Lookup(t.predicate); kind && *kind != LabelKind::kRelation) {
      Ambiguity(t.predicate, "predicate", Placeholder::kRel);
    }
    Fill(Placeholder::kRel, ToString(t.predicate));
    Fill(Node(t.object, IsRdfType(t.predicate), "object"), ToString(t.object));
  }

  const OntologySnapshot* ontology_;
  Decomposition out_;
};

}  // namespace

Decomposition Decompose(const CanonicalQuery& query, const OntologySnapshot* ontology) {
  return Decomposer(ontology).Run(query.ast);
}

/******************* Merge *******************/

ArityMismatchError::ArityMismatchError(std::size_t expected, std::size_t got)
    : Error("arity mismatch: structure has " + std::to_string(expected) +
            " placeholders, content has " + std::to_string(got)),
      expected_(expected),
      got_(got) {}

TagMismatchError::TagMismatchError(std::size_t position, Placeholder structure_tag,
                                   Placeholder content_tag)
    : Error("tag mismatch at placeholder " + std::to_string(position) + ": structure expects " +
            std::string(ToString(structure_tag)) + ", content has " + std::string(ToString(content_tag))),
      position_(position),
      structure_tag_(structure_tag),
      content_tag_(content_tag) {}

ParseFailureError::ParseFailureError(std::string text, const std::string& reason)
    : Error("merged query does not parse: " + reason), text_(std::move(text)) {}

CanonicalQuery Merge(const StructureTemplate& structure, const ContentAssignment& content) {
  std::vector<Placeholder> tags = structure.Placeholders();
  if (tags.size() != content.pairs.size()) throw ArityMismatchError(tags.size(), content.pairs.size());
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] != content.pairs[i].tag) throw TagMismatchError(i + 1, tags[i], content.pairs[i].tag);
  }

  std::string text;
  std::size_t next = 0;
  for (StructureToken t : structure.tokens) {
    if (!text.empty()) text += ' ';
    if (t.is_placeholder()) {
      text += content.pairs[next++].value;
    } else {
      text += t.text();
    }
  }
  try {
    return FromAst(ParseSparql(text));
  } catch (const SyntaxError& e) {
    throw ParseFailureError(text, e.what());
  } catch (const UnsupportedError& e) {
    throw ParseFailureError(text, e.what());
  }
}

/******************* Consistency check *******************/

ConsistencyReport CheckConsistency(const CanonicalQuery& query, const OntologySnapshot* ontology) {
  ConsistencyReport report;
  try {
    Decomposition d = Decompose(query, ontology);
    CanonicalQuery restored = Merge(d.structure, d.content);
    const std::string& a = query.text;
    const std::string& b = restored.text;
    if (a == b) {
      report.consistent = true;
      return report;
    }
    std::size_t i = 0;
    while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
    report.divergence = i;
    auto around = [i](const std::string& s) { return s.substr(i, 24); };
    report.detail = "first divergence at offset " + std::to_string(i) + ": original '" + around(a) +
                    "' vs restored '" + around(b) + "'";
  } catch (const Error& e) {
    report.detail = e.what();
  }
  return report;
}

}  // namespace kgsparql
