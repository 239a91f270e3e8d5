/*!
 *  Copyright (c) 2024 by Contributors
 * \file kgsparql/structure_grammar.h
 * \brief Structure vocabulary, templates and the deterministic acceptor of the structure grammar.
 *
 * Grammar accepted by the automaton:
 *
 *   query  := select | ask
 *   select := "select" proj "where" group mod*
 *   ask    := "ask" "where" group
 *   proj   := "distinct"? [var]+ | "(" agg "(" [var] ")" "as" [var] ")"
 *   agg    := count | min | max | sum | avg
 *   group  := "{" (triple | "filter" [con])+ "}"
 *   triple := subj [rel] obj "."?
 *   subj   := [ent] | [var] | [cct]
 *   obj    := [ent] | [cct] | [var] | [val]
 *   mod    := "order" "by" ("asc" | "desc")? ([var] | [con]) | "group" "by" [var]+
 *           | "having" [con] | "limit" [val] | "offset" [val]
 */
#ifndef KGSPARQL_STRUCTURE_GRAMMAR_H_
#define KGSPARQL_STRUCTURE_GRAMMAR_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgsparql/error.h"

namespace kgsparql {

enum class Placeholder : std::uint8_t { kEnt, kCct, kRel, kVar, kVal, kCon };

inline constexpr std::array<Placeholder, 6> kAllPlaceholders = {
    Placeholder::kEnt, Placeholder::kCct, Placeholder::kRel,
    Placeholder::kVar, Placeholder::kVal, Placeholder::kCon};

/*! \brief "[ent]", "[cct]", ... */
std::string_view ToString(Placeholder tag);
std::optional<Placeholder> ParsePlaceholder(std::string_view text);

/*! \brief Raised when a structure string contains a token outside the closed vocabulary. */
class UnknownTokenError : public Error {
 public:
  explicit UnknownTokenError(std::string token);
  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

/*!
 * \brief One token of the closed structure vocabulary: 24 keywords, the six placeholders and
 * the end-of-sequence marker.
 */
class StructureToken {
 public:
  static constexpr int kNumKeywords = 24;
  static constexpr int kVocabSize = kNumKeywords + 6 + 1;
  static constexpr std::string_view kEosText = "</s>";

  StructureToken() = default;

  static std::optional<StructureToken> FromString(std::string_view text);
  /*! \brief Like FromString but throws UnknownTokenError. */
  static StructureToken Parse(std::string_view text);
  static StructureToken FromId(int id);
  static StructureToken Of(Placeholder tag);
  static StructureToken Eos() { return FromId(kVocabSize - 1); }

  int id() const { return id_; }
  std::string_view text() const;
  bool is_placeholder() const { return id_ >= kNumKeywords && id_ < kVocabSize - 1; }
  bool is_keyword() const { return id_ < kNumKeywords; }
  bool is_eos() const { return id_ == kVocabSize - 1; }
  std::optional<Placeholder> placeholder() const;

  friend bool operator==(StructureToken, StructureToken) = default;
  friend auto operator<=>(StructureToken, StructureToken) = default;

 private:
  explicit StructureToken(int id) : id_(id) {}
  int id_ = 0;
};

/*! \brief All vocabulary tokens in id order, EOS last. */
const std::vector<StructureToken>& StructureVocabulary();

/*! \brief Query skeleton: keywords plus placeholders. Serialized as space-joined tokens. */
struct StructureTemplate {
  std::vector<StructureToken> tokens;

  std::string ToString() const;
  /*! \brief Placeholder tags in left-to-right order. */
  std::vector<Placeholder> Placeholders() const;

  friend bool operator==(const StructureTemplate&, const StructureTemplate&) = default;
};

/*! \brief Split on whitespace; throws UnknownTokenError for tokens outside the vocabulary. */
StructureTemplate ParseStructure(std::string_view text);

/*!
 * \brief Deterministic finite-state acceptor for the structure grammar.
 *
 * Built by direct construction from the productions; every state can reach an accepting
 * state. Transitions on EOS are not stored: EOS is legal exactly in accepting states.
 */
class ConstraintAutomaton {
 public:
  using StateId = int;
  static constexpr StateId kNoState = -1;

  /*! \brief The automaton for the grammar above. */
  static ConstraintAutomaton BuildStructureGrammar();
  /*! \brief Process-wide instance of BuildStructureGrammar(). */
  static const ConstraintAutomaton& Default();

  StateId start() const { return start_; }
  int num_states() const { return static_cast<int>(transitions_.size()); }
  bool IsAccepting(StateId state) const { return accepting_.at(state); }

  /*! \brief kNoState when no transition exists (EOS never has a transition). */
  StateId Next(StateId state, StructureToken token) const;

  /*!
   * \brief Tokens with an outgoing transition, plus EOS when the state is accepting. Sorted
   * by vocabulary id.
   */
  std::vector<StructureToken> NextTokens(StateId state) const;

  /*!
   * \brief Fewest tokens needed to reach an accepting state using only tokens enabled in
   * `allowed` (indexed by token id). -1 when unreachable.
   */
  std::vector<int> MinCompletion(const std::array<bool, StructureToken::kVocabSize>& allowed) const;

  /*! \brief State after consuming `tokens` from the start state, or kNoState. */
  StateId Run(std::span<const StructureToken> tokens) const;

  /*! \brief Graphviz rendering for documentation. */
  std::string ToDot() const;

 private:
  StateId AddState(bool accepting, std::string name);
  /*! \brief Throws std::logic_error if (from, token) already maps to another state. */
  void AddEdge(StateId from, StructureToken token, StateId to);

  StateId start_ = 0;
  std::vector<std::array<StateId, StructureToken::kVocabSize>> transitions_;
  std::vector<bool> accepting_;
  std::vector<std::string> names_;
};

struct ValidationResult {
  bool valid = false;
  /*! First offending token index; tokens.size() when the input ends early. */
  std::size_t position = 0;
  /*! Tokens allowed at `position`. */
  std::vector<StructureToken> expected;

  explicit operator bool() const { return valid; }
};

ValidationResult ValidateStructure(std::span<const StructureToken> tokens,
                                   const ConstraintAutomaton& automaton = ConstraintAutomaton::Default());

/*! \brief Parses then validates; throws UnknownTokenError. */
ValidationResult ValidateStructure(std::string_view text,
                                   const ConstraintAutomaton& automaton = ConstraintAutomaton::Default());

struct ComplexityLabel {
  int hops = 0;
  bool aggregate = false;
  bool constraint = false;

  bool multi_hop() const { return hops > 1; }
  /*! \brief "Single-hop", "Multi-hop with constraints and aggregates", ... */
  std::string ToString() const;

  friend bool operator==(const ComplexityLabel&, const ComplexityLabel&) = default;
};

/*! \brief Hop count = number of triples; flags from aggregate and constraint keywords. */
ComplexityLabel ClassifyStructure(const StructureTemplate& structure);

}  // namespace kgsparql

#endif  // KGSPARQL_STRUCTURE_GRAMMAR_H_
