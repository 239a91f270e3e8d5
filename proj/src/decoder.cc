/*!
 *  Copyright (c) 2024 by Contributors
 * \file src/decoder.cc
 */
#include "kgsparql/decoder.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kgsparql/sparql.h"

namespace kgsparql {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

/******************* Vocabulary *******************/

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  for (std::string& t : tokens) {
    if (index_.count(t)) continue;
    index_.emplace(t, static_cast<TokenId>(tokens_.size()));
    tokens_.push_back(std::move(t));
  }
  if (!index_.count(std::string(kEosToken))) {
    index_.emplace(std::string(kEosToken), static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(kEosToken);
  }
  eos_ = index_.at(std::string(kEosToken));
}

Vocabulary Vocabulary::Structure() {
  std::vector<std::string> texts;
  for (StructureToken t : StructureVocabulary()) texts.emplace_back(t.text());
  return Vocabulary(std::move(texts));
}

std::optional<TokenId> Vocabulary::Find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void DecodeContext::Validate() const {
  if (beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
  if (max_length < 1) throw std::invalid_argument("max_length must be >= 1");
  if ((stage == DecodeStage::kContent) != expected_structure.has_value()) {
    throw std::invalid_argument("expected_structure must be present exactly for the content stage");
  }
}

/******************* Scorers *******************/

std::vector<double> UniformScorer::ScoreNext(std::span<const TokenId>, const DecodeContext&) const {
  return std::vector<double>(vocab_.size(), -std::log(static_cast<double>(vocab_.size())));
}

NgramScorer::NgramScorer(Vocabulary vocab, int order, double alpha)
    : vocab_(std::move(vocab)), order_(order), alpha_(alpha) {
  if (order < 1) throw std::invalid_argument("n-gram order must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("smoothing constant must be > 0");
}

std::vector<TokenId> NgramScorer::ContextOf(std::span<const TokenId> prefix) const {
  std::vector<TokenId> ctx(order_ - 1, kBegin);
  std::size_t take = std::min<std::size_t>(prefix.size(), ctx.size());
  std::copy(prefix.end() - take, prefix.end(), ctx.end() - take);
  return ctx;
}

void NgramScorer::Observe(std::span<const TokenId> sequence) {
  std::vector<TokenId> seq(sequence.begin(), sequence.end());
  seq.push_back(vocab_.eos());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    ContextCounts& c = counts_[ContextOf(std::span(seq).first(i))];
    ++c.total;
    ++c.next[seq[i]];
  }
}

double NgramScorer::Probability(std::span<const TokenId> prefix, TokenId next) const {
  double v = static_cast<double>(vocab_.size());
  auto it = counts_.find(ContextOf(prefix));
  if (it == counts_.end()) return 1.0 / v;
  auto hit = it->second.next.find(next);
  double count = hit == it->second.next.end() ? 0.0 : static_cast<double>(hit->second);
  return (count + alpha_) / (static_cast<double>(it->second.total) + alpha_ * v);
}

std::vector<double> NgramScorer::ScoreNext(std::span<const TokenId> prefix, const DecodeContext&) const {
  double v = static_cast<double>(vocab_.size());
  std::vector<double> scores(vocab_.size(), -std::log(v));
  auto it = counts_.find(ContextOf(prefix));
  if (it == counts_.end()) return scores;
  double denom = static_cast<double>(it->second.total) + alpha_ * v;
  std::fill(scores.begin(), scores.end(), std::log(alpha_ / denom));
  for (const auto& [tok, count] : it->second.next) {
    scores[tok] = std::log((static_cast<double>(count) + alpha_) / denom);
  }
  return scores;
}

NgramScorer TrainNgram(const std::vector<std::vector<std::string>>& corpus, int n, double alpha,
                       Vocabulary vocab) {
  if (corpus.empty()) throw std::invalid_argument("n-gram corpus is empty");
  NgramScorer scorer(std::move(vocab), n, alpha);
  for (const auto& sentence : corpus) {
    std::vector<TokenId> ids;
    ids.reserve(sentence.size());
    for (const std::string& t : sentence) {
      auto id = scorer.vocab().Find(t);
      if (!id) throw std::invalid_argument("token '" + t + "' is not in the n-gram vocabulary");
      ids.push_back(*id);
    }
    scorer.Observe(ids);
  }
  return scorer;
}

NgramScorer TrainNgram(const std::vector<std::vector<std::string>>& corpus, int n, double alpha) {
  std::vector<std::string> tokens;
  for (const auto& sentence : corpus) tokens.insert(tokens.end(), sentence.begin(), sentence.end());
  return TrainNgram(corpus, n, alpha, Vocabulary(std::move(tokens)));
}

/******************* Constraints *******************/

namespace {

class GrammarConstraint : public Constraint {
 public:
  GrammarConstraint(const ConstraintAutomaton& automaton, const Vocabulary& vocab)
      : automaton_(automaton), eos_(vocab.eos()), to_structure_(vocab.size(), -1) {
    std::array<bool, StructureToken::kVocabSize> present{};
    for (std::size_t id = 0; id < vocab.size(); ++id) {
      if (auto t = StructureToken::FromString(vocab.text(static_cast<TokenId>(id))); t && !t->is_eos()) {
        to_structure_[id] = t->id();
        present[t->id()] = true;
      }
    }
    completion_ = automaton_.MinCompletion(present);
  }

  ConstraintState Initial(const DecodeContext&) const override { return {automaton_.start(), 0}; }

  ConstraintState Advance(const ConstraintState& state, TokenId token) const override {
    int st = to_structure_.at(token);
    ConstraintState next = state;
    next.a = st < 0 ? ConstraintAutomaton::kNoState
                    : automaton_.Next(state.a, StructureToken::FromId(st));
    return next;
  }

  void Mask(const ConstraintState& state, std::span<const TokenId> prefix, std::span<double> scores,
            const DecodeContext& context) const override {
    if (state.a == ConstraintAutomaton::kNoState) {
      std::fill(scores.begin(), scores.end(), kNegInf);
      return;
    }
    long remaining = static_cast<long>(context.max_length) - static_cast<long>(prefix.size());
    for (std::size_t id = 0; id < scores.size(); ++id) {
      if (static_cast<TokenId>(id) == eos_) {
        if (!automaton_.IsAccepting(state.a)) scores[id] = kNegInf;
        continue;
      }
      int st = to_structure_[id];
      auto next = st < 0 ? ConstraintAutomaton::kNoState
                         : automaton_.Next(state.a, StructureToken::FromId(st));
      if (next == ConstraintAutomaton::kNoState || completion_[next] < 0 ||
          1 + completion_[next] > remaining) {
        scores[id] = kNegInf;
      }
    }
  }

 private:
  ConstraintAutomaton automaton_;
  TokenId eos_;
  std::vector<int> to_structure_;
  std::vector<int> completion_;
};

class StructureAlignmentConstraint : public Constraint {
 public:
  StructureAlignmentConstraint(const StructureTemplate& structure, const Vocabulary& vocab)
      : eos_(vocab.eos()), is_tag_(vocab.size(), false) {
    for (Placeholder p : structure.Placeholders()) {
      auto id = vocab.Find(ToString(p));
      expected_.push_back(id ? *id : -1);
    }
    for (Placeholder p : kAllPlaceholders) {
      if (auto id = vocab.Find(ToString(p))) is_tag_[*id] = true;
    }
  }

  // a: placeholders completed; b: 0 at a tag position, 1 at a value position.
  ConstraintState Initial(const DecodeContext&) const override { return {0, 0}; }

  ConstraintState Advance(const ConstraintState& state, TokenId) const override {
    return state.b == 0 ? ConstraintState{state.a, 1} : ConstraintState{state.a + 1, 0};
  }

  void Mask(const ConstraintState& state, std::span<const TokenId>, std::span<double> scores,
            const DecodeContext&) const override {
    if (state.b == 0) {
      TokenId keep = static_cast<std::size_t>(state.a) < expected_.size() ? expected_[state.a] : eos_;
      for (std::size_t id = 0; id < scores.size(); ++id) {
        if (static_cast<TokenId>(id) != keep) scores[id] = kNegInf;
      }
    } else {
      for (std::size_t id = 0; id < scores.size(); ++id) {
        if (is_tag_[id] || static_cast<TokenId>(id) == eos_) scores[id] = kNegInf;
      }
    }
  }

 private:
  TokenId eos_;
  std::vector<TokenId> expected_;
  std::vector<bool> is_tag_;
};

class ValueKindConstraint : public Constraint {
 public:
  explicit ValueKindConstraint(const Vocabulary& vocab) : tag_of_(vocab.size(), -1) {
    for (std::size_t id = 0; id < vocab.size(); ++id) {
      if (auto tag = ParsePlaceholder(vocab.text(static_cast<TokenId>(id)))) {
        tag_of_[id] = static_cast<int>(*tag);
      }
    }
    for (Placeholder tag : kAllPlaceholders) {
      std::vector<bool>& fits = fits_[static_cast<int>(tag)];
      fits.resize(vocab.size());
      for (std::size_t id = 0; id < vocab.size(); ++id) {
        fits[id] = tag_of_[id] >= 0 || static_cast<TokenId>(id) == vocab.eos() ||
                   ValueFitsTag(vocab.text(static_cast<TokenId>(id)), tag);
      }
    }
  }

  ConstraintState Initial(const DecodeContext&) const override { return {}; }
  ConstraintState Advance(const ConstraintState& state, TokenId) const override { return state; }

  void Mask(const ConstraintState&, std::span<const TokenId> prefix, std::span<double> scores,
            const DecodeContext&) const override {
    if (prefix.empty() || tag_of_[prefix.back()] < 0) return;
    const std::vector<bool>& fits = fits_[tag_of_[prefix.back()]];
    for (std::size_t id = 0; id < scores.size(); ++id) {
      if (!fits[id]) scores[id] = kNegInf;
    }
  }

 private:
  std::vector<int> tag_of_;
  std::array<std::vector<bool>, kAllPlaceholders.size()> fits_;
};

class SubgraphConstraint : public Constraint {
 public:
  SubgraphConstraint(const std::set<std::string>& allowed, SubgraphMode mode, const Vocabulary& vocab,
                     double bonus)
      : mode_(mode), bonus_(bonus), in_set_(vocab.size(), false), empty_(allowed.empty()) {
    if (auto rel = vocab.Find(ToString(Placeholder::kRel))) rel_tag_ = *rel;
    for (std::size_t id = 0; id < vocab.size(); ++id) {
      in_set_[id] = allowed.count(vocab.text(static_cast<TokenId>(id))) > 0;
    }
    if (mode == SubgraphMode::kBonus && !(bonus >= 0.0)) {
      throw std::invalid_argument("subgraph bonus must be >= 0");
    }
  }

  ConstraintState Initial(const DecodeContext&) const override { return {}; }
  ConstraintState Advance(const ConstraintState& state, TokenId) const override { return state; }

  void Mask(const ConstraintState&, std::span<const TokenId> prefix, std::span<double> scores,
            const DecodeContext&) const override {
    if (empty_ || !rel_tag_ || prefix.empty() || prefix.back() != *rel_tag_) return;
    bool intersects = false;
    for (std::size_t id = 0; id < scores.size(); ++id) {
      if (in_set_[id] && scores[id] != kNegInf) intersects = true;
    }
    if (!intersects) return;
    for (std::size_t id = 0; id < scores.size(); ++id) {
      if (in_set_[id] || scores[id] == kNegInf) continue;
      scores[id] = mode_ == SubgraphMode::kHard ? kNegInf : scores[id] - bonus_;
    }
  }

 private:
  SubgraphMode mode_;
  double bonus_;
  std::vector<bool> in_set_;
  bool empty_;
  std::optional<TokenId> rel_tag_;
};

}  // namespace

bool ValueFitsTag(std::string_view value, Placeholder tag) {
  if (value.empty() || ParsePlaceholder(value)) return false;
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  bool variable = IsCanonicalVariableName(value);
  bool literal = value.front() == '"' || is_digit(value.front()) ||
                 ((value.front() == '-' || value.front() == '+') && value.size() > 1 && is_digit(value[1]));
  bool expression = value.front() == '(' || value.find('(') != std::string_view::npos;
  bool iri = (value.front() == '<' && value.back() == '>') ||
             (!variable && !literal && !expression && value.find(':') != std::string_view::npos);
  switch (tag) {
    case Placeholder::kVar:
      return variable;
    case Placeholder::kVal:
      return literal;
    case Placeholder::kCon:
      return expression;
    default:
      return iri;
  }
}

ConstraintPtr MakeGrammarConstraint(const ConstraintAutomaton& automaton, const Vocabulary& vocab) {
  return std::make_shared<GrammarConstraint>(automaton, vocab);
}

ConstraintPtr MakeStructureConstraint(const StructureTemplate& structure, const Vocabulary& vocab) {
  return std::make_shared<StructureAlignmentConstraint>(structure, vocab);
}

ConstraintPtr MakeValueKindConstraint(const Vocabulary& vocab) {
  return std::make_shared<ValueKindConstraint>(vocab);
}

ConstraintPtr MakeSubgraphConstraint(const std::set<std::string>& allowed, SubgraphMode mode,
                                     const Vocabulary& vocab, double bonus) {
  return std::make_shared<SubgraphConstraint>(allowed, mode, vocab, bonus);
}

/******************* Beam search *******************/

namespace {

struct Beam {
  std::vector<TokenId> tokens;
  double logprob = 0.0;
  std::vector<ConstraintState> states;
};

struct Candidate {
  std::size_t beam;
  TokenId token;
  double logprob;
};

bool TextLess(const Vocabulary& vocab, std::span<const TokenId> a, std::span<const TokenId> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [&vocab](TokenId x, TokenId y) { return vocab.text(x) < vocab.text(y); });
}

}  // namespace

std::vector<Hypothesis> BeamSearch(const Scorer& scorer, std::span<const ConstraintPtr> constraints,
                                   const DecodeContext& context) {
  context.Validate();
  const Vocabulary& vocab = scorer.vocab();
  const TokenId eos = vocab.eos();

  std::vector<Beam> live(1);
  for (const ConstraintPtr& c : constraints) live[0].states.push_back(c->Initial(context));
  std::vector<Hypothesis> finished;

  for (int step = 0; !live.empty(); ++step) {
    std::vector<Candidate> candidates;
    for (std::size_t b = 0; b < live.size(); ++b) {
      const Beam& beam = live[b];
      std::vector<double> scores = scorer.ScoreNext(beam.tokens, context);
      if (scores.size() != vocab.size()) throw std::logic_error("scorer returned wrong number of scores");
      if (step >= context.max_length) {
        for (std::size_t id = 0; id < scores.size(); ++id) {
          if (static_cast<TokenId>(id) != eos) scores[id] = kNegInf;
        }
      }
      for (std::size_t c = 0; c < constraints.size(); ++c) {
        constraints[c]->Mask(beam.states[c], beam.tokens, scores, context);
      }
      for (std::size_t id = 0; id < scores.size(); ++id) {
        if (scores[id] != kNegInf) {
          candidates.push_back({b, static_cast<TokenId>(id), beam.logprob + scores[id]});
        }
      }
    }
    if (candidates.empty()) {
      if (finished.empty()) throw AllBeamsDeadError(step);
      break;
    }

    auto better = [&](const Candidate& x, const Candidate& y) {
      if (x.logprob != y.logprob) return x.logprob > y.logprob;
      std::vector<TokenId> sx = live[x.beam].tokens, sy = live[y.beam].tokens;
      sx.push_back(x.token);
      sy.push_back(y.token);
      return TextLess(vocab, sx, sy);
    };
    std::size_t keep = std::min<std::size_t>(candidates.size(), context.beam_size);
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(), better);

    std::vector<Beam> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const Candidate& cand = candidates[i];
      const Beam& parent = live[cand.beam];
      if (cand.token == eos) {
        finished.push_back({parent.tokens, cand.logprob});
        continue;
      }
      Beam child;
      child.tokens = parent.tokens;
      child.tokens.push_back(cand.token);
      child.logprob = cand.logprob;
      child.states.reserve(constraints.size());
      for (std::size_t c = 0; c < constraints.size(); ++c) {
        child.states.push_back(constraints[c]->Advance(parent.states[c], cand.token));
      }
      next.push_back(std::move(child));
    }
    live = std::move(next);
  }

  std::sort(finished.begin(), finished.end(), [&](const Hypothesis& x, const Hypothesis& y) {
    if (x.logprob != y.logprob) return x.logprob > y.logprob;
    return TextLess(vocab, x.tokens, y.tokens);
  });
  if (finished.size() > static_cast<std::size_t>(context.beam_size)) finished.resize(context.beam_size);
  return finished;
}

std::vector<std::string> TokenTexts(const Vocabulary& vocab, std::span<const TokenId> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (TokenId t : tokens) out.push_back(vocab.text(t));
  return out;
}

nlohmann::json HypothesisToJson(const Vocabulary& vocab, const Hypothesis& hyp, int rank, bool valid) {
  return {{"rank", rank}, {"tokens", TokenTexts(vocab, hyp.tokens)}, {"logprob", hyp.logprob}, {"valid", valid}};
}

}  // namespace kgsparql
