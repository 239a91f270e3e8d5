/*!
 *  Copyright (c) 2024 by Contributors
 * \file src/sparql_lexer.cc
 */
#include "sparql_lexer.h"

#include <cctype>

#include "kgsparql/error.h"

namespace kgsparql {
namespace detail {

namespace {

bool IsAlpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool IsDigit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool IsWordChar(char c) { return IsAlpha(c) || IsDigit(c) || c == '_'; }
bool IsLabelChar(char c) { return IsWordChar(c) || c == '-' || c == '.'; }

bool IsIriChar(char c) {
  switch (c) {
    case '<': case '>': case '"': case '{': case '}': case '|': case '^': case '`': case '\\':
      return false;
    default:
      return static_cast<unsigned char>(c) > 0x20;
  }
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : s_(text) {}

  std::vector<Tok> Run() {
    std::vector<Tok> out;
    while (true) {
      SkipSpaceAndComments();
      if (i_ >= s_.size()) break;
      out.push_back(Next());
    }
    Tok end;
    end.kind = TokKind::kEnd;
    end.pos = s_.size();
    out.push_back(std::move(end));
    return out;
  }

 private:
  void SkipSpaceAndComments() {
    while (i_ < s_.size()) {
      if (IsSpace(s_[i_])) {
        ++i_;
      } else if (s_[i_] == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  [[noreturn]] void Fail(std::size_t pos, const std::string& what) {
    throw SyntaxError(pos, {}, what);
  }

  Tok Make(TokKind kind, std::size_t start, std::string text) {
    Tok t;
    t.kind = kind;
    t.pos = start;
    t.text = std::move(text);
    return t;
  }

  Tok Next() {
    std::size_t start = i_;
    char c = s_[i_];

    if (c == '<') {
      std::size_t j = i_ + 1;
      while (j < s_.size() && IsIriChar(s_[j])) ++j;
      if (j < s_.size() && s_[j] == '>') {
        i_ = j + 1;
        return Make(TokKind::kIriRef, start, std::string(s_.substr(start, i_ - start)));
      }
    }
    if ((c == '?' || c == '$') && i_ + 1 < s_.size() && IsWordChar(s_[i_ + 1])) {
      std::size_t j = i_ + 1;
      while (j < s_.size() && IsWordChar(s_[j])) ++j;
      i_ = j;
      return Make(TokKind::kVariable, start, std::string(s_.substr(start + 1, j - start - 1)));
    }
    if (c == '"' || c == '\'') return LexLiteral();
    if (IsDigit(c)) return LexNumber();
    if ((c == '+' || c == '-') && i_ + 1 < s_.size() && IsDigit(s_[i_ + 1]) &&
        (i_ == 0 || IsSpace(s_[i_ - 1]) || s_[i_ - 1] == '(' || s_[i_ - 1] == ',')) {
      return LexNumber();
    }
    if (IsAlpha(c) || c == '_' || c == ':') return LexName();
    return LexPunct();
  }

  Tok LexLiteral() {
    std::size_t start = i_;
    char quote = s_[i_];
    if (s_.substr(i_, 3) == std::string(3, quote)) throw UnsupportedError("long string literal");
    std::size_t j = i_ + 1;
    while (j < s_.size() && s_[j] != quote) {
      if (s_[j] == '\n') Fail(j, "newline in string literal");
      j += s_[j] == '\\' ? 2 : 1;
    }
    if (j >= s_.size()) Fail(start, "unterminated string literal");
    ++j;
    if (j < s_.size() && s_[j] == '@') {
      std::size_t k = j + 1;
      while (k < s_.size() && (IsAlpha(s_[k]) || IsDigit(s_[k]) || s_[k] == '-')) ++k;
      if (k == j + 1) Fail(j, "empty language tag");
      j = k;
    }
    Tok t = Make(TokKind::kLiteral, start, std::string(s_.substr(start, j - start)));
    i_ = j;
    if (s_.substr(i_, 2) == "^^") {
      i_ += 2;
      if (i_ >= s_.size()) Fail(i_, "datatype expected after ^^");
      Tok dt = Next();
      if (dt.kind == TokKind::kIriRef || dt.kind == TokKind::kPrefixedName) {
        t.datatype = dt.text;
      } else {
        Fail(dt.pos, "datatype IRI expected after ^^");
      }
    }
    return t;
  }

  Tok LexNumber() {
    std::size_t start = i_;
    std::size_t j = i_;
    if (s_[j] == '+' || s_[j] == '-') ++j;
    while (j < s_.size() && IsDigit(s_[j])) ++j;
    if (j + 1 < s_.size() && s_[j] == '.' && IsDigit(s_[j + 1])) {
      ++j;
      while (j < s_.size() && IsDigit(s_[j])) ++j;
    }
    if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
      if (k < s_.size() && IsDigit(s_[k])) {
        while (k < s_.size() && IsDigit(s_[k])) ++k;
        j = k;
      }
    }
    i_ = j;
    return Make(TokKind::kNumber, start, std::string(s_.substr(start, j - start)));
  }

  // Bare word, prefixed name ("label:local", ":local") or bare canonical variable.
  Tok LexName() {
    std::size_t start = i_;
    std::size_t j = i_;
    while (j < s_.size() && IsLabelChar(s_[j])) ++j;
    if (j < s_.size() && s_[j] == ':') {
      std::string label(s_.substr(start, j - start));
      ++j;
      std::string local;
      bool escaped = false;
      while (j < s_.size()) {
        if (IsLocalNameChar(s_[j])) {
          local.push_back(s_[j++]);
        } else if (s_[j] == '\\' && j + 1 < s_.size() && !IsSpace(s_[j + 1])) {
          local.push_back(s_[j + 1]);
          escaped = true;
          j += 2;
        } else {
          break;
        }
      }
      // A dot is a triple terminator only when whitespace-delimited; inside a name it is kept.
      i_ = j;
      Tok t = Make(TokKind::kPrefixedName, start, label + ":" + local);
      t.label = std::move(label);
      t.local = std::move(local);
      t.escaped = escaped;
      return t;
    }
    if (s_[start] == ':') Fail(start, "unexpected ':'");
    j = start;
    while (j < s_.size() && IsWordChar(s_[j])) ++j;
    i_ = j;
    std::string word(s_.substr(start, j - start));
    if (word.size() > 3 && word.compare(0, 3, "var") == 0 &&
        word.find_first_not_of("0123456789", 3) == std::string::npos) {
      return Make(TokKind::kVariable, start, std::move(word));
    }
    return Make(TokKind::kWord, start, Lower(word));
  }

  Tok LexPunct() {
    std::size_t start = i_;
    static constexpr std::string_view kTwo[] = {"&&", "||", "!=", "<=", ">="};
    for (std::string_view op : kTwo) {
      if (s_.substr(i_, 2) == op) {
        i_ += 2;
        return Make(TokKind::kPunct, start, std::string(op));
      }
    }
    static constexpr std::string_view kOne = "{}().,;*[]/|^+-=!<>?$";
    char c = s_[i_];
    if (kOne.find(c) == std::string_view::npos) {
      Fail(start, std::string("unexpected character '") + c + "'");
    }
    ++i_;
    return Make(TokKind::kPunct, start, std::string(1, c));
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

}  // namespace

bool IsLocalNameChar(char c) {
  return IsWordChar(c) || c == '-' || c == '.' || c == ':' || c == '%';
}

std::vector<Tok> Lex(std::string_view text) { return Lexer(text).Run(); }

}  // namespace detail
}  // namespace kgsparql
