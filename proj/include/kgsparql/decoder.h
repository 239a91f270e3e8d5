/*!
 *  Copyright (c) 2024 by Contributors
 * \file kgsparql/decoder.h
 * \brief Beam search over a pluggable scorer with composable logit-masking constraints.
 *
 * Three constraints are provided: grammar (structure stage), structure alignment (content
 * stage) and subgraph relation preference (content stage). A constraint never raises a
 * score; disallowed candidates are set to -inf.
 */
#ifndef KGSPARQL_DECODER_H_
#define KGSPARQL_DECODER_H_

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "kgsparql/error.h"
#include "kgsparql/structure_grammar.h"

namespace kgsparql {

using TokenId = std::int32_t;

inline constexpr std::string_view kEosToken = "</s>";

/*! \brief Closed decoding vocabulary. The end-of-sequence token is always present. */
class Vocabulary {
 public:
  /*! \brief Duplicates are dropped; EOS is appended when missing. */
  explicit Vocabulary(std::vector<std::string> tokens);

  /*! \brief The structure vocabulary (keywords, placeholders, EOS). */
  static Vocabulary Structure();

  std::size_t size() const { return tokens_.size(); }
  TokenId eos() const { return eos_; }
  const std::string& text(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> Find(std::string_view text) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId eos_ = 0;
};

enum class DecodeStage { kStructure, kContent };

struct DecodeContext {
  DecodeStage stage = DecodeStage::kStructure;
  /*! Present iff stage == kContent. */
  std::optional<StructureTemplate> expected_structure;
  std::optional<std::set<std::string>> allowed_relations;
  int beam_size = 4;
  /*! Maximum number of tokens before EOS. */
  int max_length = 64;

  /*! \throws std::invalid_argument */
  void Validate() const;
};

/*! \brief Next-token log-probabilities, one entry per vocabulary id (EOS included). */
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual const Vocabulary& vocab() const = 0;
  virtual std::vector<double> ScoreNext(std::span<const TokenId> prefix,
                                        const DecodeContext& context) const = 0;
};

class UniformScorer : public Scorer {
 public:
  explicit UniformScorer(Vocabulary vocab) : vocab_(std::move(vocab)) {}
  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<double> ScoreNext(std::span<const TokenId> prefix,
                                const DecodeContext& context) const override;

 private:
  Vocabulary vocab_;
};

/*!
 * \brief Laplace-smoothed n-gram model:
 *   P(w | ctx) = (count(ctx, w) + alpha) / (count(ctx) + alpha * |V|)
 * Contexts are the previous n-1 tokens, left-padded with a begin marker; sequences end
 * with EOS. Unseen contexts therefore yield the uniform distribution.
 */
class NgramScorer : public Scorer {
 public:
  NgramScorer(Vocabulary vocab, int order, double alpha);

  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<double> ScoreNext(std::span<const TokenId> prefix,
                                const DecodeContext& context) const override;

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  double Probability(std::span<const TokenId> prefix, TokenId next) const;

  /*! \brief Count one training sequence (EOS appended internally). */
  void Observe(std::span<const TokenId> sequence);

 private:
  static constexpr TokenId kBegin = -1;
  struct ContextCounts {
    std::int64_t total = 0;
    std::unordered_map<TokenId, std::int64_t> next;
  };
  std::vector<TokenId> ContextOf(std::span<const TokenId> prefix) const;

  Vocabulary vocab_;
  int order_;
  double alpha_;
  std::map<std::vector<TokenId>, ContextCounts> counts_;
};

/*!
 * \brief Train an n-gram scorer. Every corpus token must be in `vocab`.
 * \throws std::invalid_argument for an empty corpus, n < 1, alpha <= 0 or unknown tokens.
 */
NgramScorer TrainNgram(const std::vector<std::vector<std::string>>& corpus, int n, double alpha,
                       Vocabulary vocab);
/*! \brief Vocabulary inferred from the corpus in first-appearance order, plus EOS. */
NgramScorer TrainNgram(const std::vector<std::vector<std::string>>& corpus, int n, double alpha);

/*! \brief Per-hypothesis constraint state; meaning is private to each constraint. */
struct ConstraintState {
  std::int32_t a = 0;
  std::int32_t b = 0;
};

class Constraint {
 public:
  virtual ~Constraint() = default;
  virtual ConstraintState Initial(const DecodeContext& context) const = 0;
  virtual ConstraintState Advance(const ConstraintState& state, TokenId token) const = 0;
  /*! \brief Lower (never raise) scores of disallowed candidates. */
  virtual void Mask(const ConstraintState& state, std::span<const TokenId> prefix,
                    std::span<double> scores, const DecodeContext& context) const = 0;
};

using ConstraintPtr = std::shared_ptr<const Constraint>;

/*!
 * \brief Only tokens with an automaton transition survive; EOS only in accepting states.
 * Tokens whose shortest completion would exceed context.max_length are masked too.
 */
ConstraintPtr MakeGrammarConstraint(const ConstraintAutomaton& automaton, const Vocabulary& vocab);

/*!
 * \brief Content output alternates tag / value. At the k-th tag position only the k-th
 * placeholder of `structure` is allowed; at value positions tags and EOS are masked; after
 * the last value only EOS is allowed.
 */
ConstraintPtr MakeStructureConstraint(const StructureTemplate& structure, const Vocabulary& vocab);

/*!
 * \brief Whether `value` has the term kind a tag admits: var<N> for [var], an IRI or prefixed
 * name for [ent], [cct] and [rel], a literal for [val], a bracketed or called expression for [con].
 */
bool ValueFitsTag(std::string_view value, Placeholder tag);

/*!
 * \brief Stage C: at the value following a tag, masks candidates whose term kind cannot fill
 * that tag. Tokens that are tags or EOS are left to the other constraints.
 */
ConstraintPtr MakeValueKindConstraint(const Vocabulary& vocab);

enum class SubgraphMode { kHard, kBonus };

/*!
 * \brief At value positions that follow a [rel] tag, prefer relations in `allowed`.
 * Hard mode masks all other candidates; bonus mode lowers them by `bonus`, which shifts
 * the in-set relations up by `bonus` relative to the rest. No-op when `allowed` is empty
 * or no surviving candidate is in it.
 */
ConstraintPtr MakeSubgraphConstraint(const std::set<std::string>& allowed, SubgraphMode mode,
                                     const Vocabulary& vocab, double bonus = 0.0);

/*! \brief A finished sequence; tokens exclude EOS, logprob includes it. */
struct Hypothesis {
  std::vector<TokenId> tokens;
  double logprob = 0.0;
};

class AllBeamsDeadError : public Error {
 public:
  explicit AllBeamsDeadError(int step)
      : Error("constraints eliminated every candidate at step " + std::to_string(step)), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/*!
 * \brief Beam search with raw log-prob sums and no length normalization.
 *
 * Each step keeps the best beam_size extensions across all live beams; extensions ending in
 * EOS are finished. Ties are broken by the lexicographic order of token texts. Returns at most
 * beam_size finished sequences, best first.
 *
 * \throws AllBeamsDeadError when no sequence can finish.
 */
std::vector<Hypothesis> BeamSearch(const Scorer& scorer, std::span<const ConstraintPtr> constraints,
                                   const DecodeContext& context);

std::vector<std::string> TokenTexts(const Vocabulary& vocab, std::span<const TokenId> tokens);

/*! \brief {"rank":1,"tokens":[...],"logprob":-3.2,"valid":true} */
nlohmann::json HypothesisToJson(const Vocabulary& vocab, const Hypothesis& hyp, int rank, bool valid);

}  // namespace kgsparql

#endif  // KGSPARQL_DECODER_H_
