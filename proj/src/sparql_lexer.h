/*!
 *  Copyright (c) 2024 by Contributors
 * \file src/sparql_lexer.h
 * \brief Tokenizer for the SPARQL subset. Internal to the library.
 */
#ifndef KGSPARQL_SRC_SPARQL_LEXER_H_
#define KGSPARQL_SRC_SPARQL_LEXER_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgsparql {
namespace detail {

enum class TokKind {
  kIriRef,        // text: "<...>" including brackets
  kPrefixedName,  // text: "label:local"; label/local split below
  kVariable,      // text: name without sigil
  kLiteral,       // text: quoted form plus language tag; datatype separate
  kNumber,
  kWord,          // text: lowercased bare word
  kPunct,
  kEnd,
};

struct Tok {
  TokKind kind = TokKind::kEnd;
  std::string text;
  std::size_t pos = 0;
  std::optional<std::string> datatype;
  // Prefixed names only.
  std::string label;
  std::string local;
  bool escaped = false;  // local name contained backslash escapes (already removed)
};

/*! \brief Throws SyntaxError / UnsupportedError. The last token is always kEnd. */
std::vector<Tok> Lex(std::string_view text);

bool IsLocalNameChar(char c);

}  // namespace detail
}  // namespace kgsparql

#endif  // KGSPARQL_SRC_SPARQL_LEXER_H_
