/*!
 *  Copyright (c) 2024 by Contributors
 * \file tests/decoder_test.cc
 */
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "kgsparql/decoder.h"
#include "oracles.h"

using namespace kgsparql;
using oracle::AsRanked;
using oracle::ContentContext;
using oracle::Ranked;
using oracle::StructureContext;
using oracle::TagsAligned;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const std::vector<std::string> kApple = {"select", "[var]", "where", "{", "[ent]", "[rel]", "[var]", "}"};

std::vector<TokenId> Ids(const Vocabulary& v, const std::vector<std::string>& texts) {
  std::vector<TokenId> out;
  for (const std::string& t : texts) out.push_back(*v.Find(t));
  return out;
}

/*! Replays `tokens` through `c` and returns the masked copy of `scores`. */
std::vector<double> MaskAfter(const Constraint& c, const Vocabulary& v, const std::vector<std::string>& tokens,
                              std::vector<double> scores, const DecodeContext& ctx) {
  ConstraintState s = c.Initial(ctx);
  std::vector<TokenId> prefix = Ids(v, tokens);
  for (TokenId t : prefix) s = c.Advance(s, t);
  c.Mask(s, prefix, scores, ctx);
  return scores;
}

std::set<std::string> Unmasked(const Vocabulary& v, const std::vector<double>& scores) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] != kNegInf) out.insert(v.text(static_cast<TokenId>(i)));
  }
  return out;
}

/*! Scores every token -50 except the one that continues `path`. */
class PathScorer : public Scorer {
 public:
  PathScorer(Vocabulary vocab, std::vector<std::string> path) : vocab_(std::move(vocab)), path_(std::move(path)) {}
  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<double> ScoreNext(std::span<const TokenId> prefix, const DecodeContext&) const override {
    std::vector<double> out(vocab_.size(), -50.0);
    std::string next = prefix.size() < path_.size() ? path_[prefix.size()] : std::string(kEosToken);
    out[*vocab_.Find(next)] = 0.0;
    return out;
  }

 private:
  Vocabulary vocab_;
  std::vector<std::string> path_;
};

Vocabulary ContentVocab() {
  return Vocabulary({"[ent]", "[cct]", "[rel]", "[var]", "[val]", "[con]", "var0", "var1", "dbr:Apple_Inc.",
                     "dbo:foundedBy", "ns:film.performance.actor", "ns:tv.regular_tv_appearance.actor"});
}

}  // namespace

TEST_CASE("vocabulary") {
  Vocabulary v({"b", "a", "b"});
  CHECK(v.size() == 3);
  CHECK(v.text(v.eos()) == "</s>");
  CHECK(v.Find("a") == 1);
  CHECK(v.Find("zzz") == std::nullopt);
  CHECK(Vocabulary::Structure().size() == static_cast<std::size_t>(StructureToken::kVocabSize));
}

TEST_CASE("context validation") {
  DecodeContext ctx;
  CHECK_NOTHROW(ctx.Validate());
  ctx.beam_size = 0;
  CHECK_THROWS_AS(ctx.Validate(), std::invalid_argument);
  ctx.beam_size = 1;
  ctx.max_length = 0;
  CHECK_THROWS_AS(ctx.Validate(), std::invalid_argument);
  ctx.max_length = 3;
  ctx.stage = DecodeStage::kContent;
  CHECK_THROWS_AS(ctx.Validate(), std::invalid_argument);
}

TEST_CASE("n-gram closed form") {
  Vocabulary v({"a", "b", "c"});
  const double alpha = 0.5;
  NgramScorer bigram = TrainNgram({{"a", "b", "a"}}, 2, alpha, v);
  const double size = 4.0;
  TokenId a = *v.Find("a"), b = *v.Find("b"), c = *v.Find("c");
  std::vector<TokenId> none, after_a = {a}, after_ab = {a, b}, after_c = {c};
  // Bigram counts from <s> a b a </s>: <s>->a, a->b, b->a, a-></s>.
  CHECK(bigram.Probability(none, a) == doctest::Approx((1 + alpha) / (1 + alpha * size)));
  CHECK(bigram.Probability(none, b) == doctest::Approx(alpha / (1 + alpha * size)));
  CHECK(bigram.Probability(after_a, b) == doctest::Approx((1 + alpha) / (2 + alpha * size)));
  CHECK(bigram.Probability(after_a, v.eos()) == doctest::Approx((1 + alpha) / (2 + alpha * size)));
  CHECK(bigram.Probability(after_a, c) == doctest::Approx(alpha / (2 + alpha * size)));
  CHECK(bigram.Probability(after_ab, a) == doctest::Approx((1 + alpha) / (1 + alpha * size)));
  for (const auto& prefix : {none, after_a, after_ab, after_c}) {
    double total = 0.0;
    std::vector<double> scores = bigram.ScoreNext(prefix, DecodeContext{});
    for (TokenId t = 0; t < static_cast<TokenId>(v.size()); ++t) {
      CHECK(scores[t] == doctest::Approx(std::log(bigram.Probability(prefix, t))));
      total += std::exp(scores[t]);
    }
    CHECK(total == doctest::Approx(1.0));
  }
  // c never starts a context.
  for (TokenId t = 0; t < static_cast<TokenId>(v.size()); ++t) {
    CHECK(bigram.Probability(after_c, t) == doctest::Approx(1.0 / size));
  }
  NgramScorer smooth = TrainNgram({{"a", "b", "a"}}, 2, 1e9, v);
  for (TokenId t = 0; t < static_cast<TokenId>(v.size()); ++t) {
    CHECK(smooth.Probability(after_a, t) == doctest::Approx(1.0 / size).epsilon(1e-6));
  }
  NgramScorer unigram = TrainNgram({{"a", "b", "a"}}, 1, 1.0, v);
  CHECK(unigram.Probability(after_ab, a) == doctest::Approx(3.0 / 8.0));
  CHECK_THROWS_AS(TrainNgram({}, 2, 1.0, v), std::invalid_argument);
  CHECK_THROWS_AS(TrainNgram({{"a"}}, 0, 1.0, v), std::invalid_argument);
  CHECK_THROWS_AS(TrainNgram({{"a"}}, 2, 0.0, v), std::invalid_argument);
  CHECK_THROWS(TrainNgram({{"q"}}, 2, 1.0, v));
}

TEST_CASE("uniform scorer") {
  UniformScorer u(Vocabulary({"a", "b", "c"}));
  for (double s : u.ScoreNext({}, DecodeContext{})) CHECK(s == doctest::Approx(-std::log(4.0)));
}

TEST_CASE("grammar constraint examples") {
  Vocabulary v = Vocabulary::Structure();
  ConstraintPtr g = MakeGrammarConstraint(ConstraintAutomaton::Default(), v);
  DecodeContext ctx = StructureContext(4, 64);
  std::vector<double> zeros(v.size(), 0.0);
  CHECK(Unmasked(v, MaskAfter(*g, v, {}, zeros, ctx)) == std::set<std::string>{"select", "ask"});
  CHECK(Unmasked(v, MaskAfter(*g, v, {"ask"}, zeros, ctx)) == std::set<std::string>{"where"});
  std::vector<double> m = MaskAfter(*g, v, {"select", "[var]", "where", "{", "[ent]"}, zeros, ctx);
  CHECK(m[*v.Find("[ent]")] == kNegInf);
  CHECK(Unmasked(v, m) == std::set<std::string>{"[rel]"});
  std::vector<double> done = MaskAfter(*g, v, kApple, zeros, ctx);
  CHECK(done[v.eos()] == 0.0);
  // With one slot left only EOS fits.
  CHECK(Unmasked(v, MaskAfter(*g, v, kApple, zeros, StructureContext(4, 9))) == std::set<std::string>{"</s>"});
  // The shortest completion of "ask where" is 4 more tokens.
  CHECK(Unmasked(v, MaskAfter(*g, v, {"ask", "where"}, zeros, StructureContext(4, 5))).empty());
  CHECK(Unmasked(v, MaskAfter(*g, v, {"ask", "where"}, zeros, StructureContext(4, 6))) == std::set<std::string>{"{"});
}

TEST_CASE("structure constraint examples") {
  Vocabulary v = ContentVocab();
  StructureTemplate s = ParseStructure("select [var] where { [ent] [rel] [var] }");
  ConstraintPtr c = MakeStructureConstraint(s, v);
  DecodeContext ctx = ContentContext(s, 4);
  std::vector<double> zeros(v.size(), 0.0);
  CHECK(Unmasked(v, MaskAfter(*c, v, {}, zeros, ctx)) == std::set<std::string>{"[var]"});
  std::vector<double> second = MaskAfter(*c, v, {"[var]", "var0"}, zeros, ctx);
  CHECK(second[*v.Find("[var]")] == kNegInf);
  CHECK(Unmasked(v, second) == std::set<std::string>{"[ent]"});
  std::set<std::string> value = Unmasked(v, MaskAfter(*c, v, {"[var]"}, zeros, ctx));
  CHECK(value.size() == 6);
  CHECK(value.count("[var]") == 0);
  CHECK(value.count("</s>") == 0);
  std::vector<std::string> full = {"[var]", "var0", "[ent]", "dbr:Apple_Inc.", "[rel]", "dbo:foundedBy", "[var]", "var0"};
  CHECK(Unmasked(v, MaskAfter(*c, v, full, zeros, ctx)) == std::set<std::string>{"</s>"});

  StructureTemplate empty;
  DecodeContext ectx = ContentContext(empty, 2);
  ectx.max_length = 1;
  std::vector<ConstraintPtr> cs = {MakeStructureConstraint(empty, v)};
  std::vector<Hypothesis> out = BeamSearch(UniformScorer(v), cs, ectx);
  REQUIRE(out.size() == 1);
  CHECK(out[0].tokens.empty());
}

TEST_CASE("subgraph constraint examples") {
  Vocabulary v = ContentVocab();
  std::set<std::string> allowed = {"ns:tv.regular_tv_appearance.actor"};
  DecodeContext ctx;
  std::vector<double> scores(v.size(), -1.0);
  TokenId film = *v.Find("ns:film.performance.actor"), tv = *v.Find("ns:tv.regular_tv_appearance.actor");
  scores[film] = -0.5;
  scores[tv] = -1.5;

  ConstraintPtr hard = MakeSubgraphConstraint(allowed, SubgraphMode::kHard, v);
  std::vector<double> h = MaskAfter(*hard, v, {"[var]", "var0", "[rel]"}, scores, ctx);
  CHECK(h[film] == kNegInf);
  CHECK(h[tv] == -1.5);
  CHECK(MaskAfter(*hard, v, {"[var]"}, scores, ctx) == scores);
  CHECK(MaskAfter(*MakeSubgraphConstraint({}, SubgraphMode::kHard, v), v, {"[rel]"}, scores, ctx) == scores);
  CHECK(MaskAfter(*MakeSubgraphConstraint({"dbo:unknown"}, SubgraphMode::kHard, v), v, {"[rel]"}, scores, ctx) ==
        scores);
  std::vector<double> tv_masked = scores;
  tv_masked[tv] = kNegInf;
  CHECK(MaskAfter(*hard, v, {"[rel]"}, tv_masked, ctx) == tv_masked);

  ConstraintPtr bonus = MakeSubgraphConstraint(allowed, SubgraphMode::kBonus, v, 2.0);
  std::vector<double> b = MaskAfter(*bonus, v, {"[rel]"}, scores, ctx);
  CHECK(b[tv] == -1.5);
  CHECK(b[film] == doctest::Approx(-2.5));
  CHECK(b[film] < b[tv]);
  // A gap of 1.0 is flipped by a bonus of 2.0; a gap of 3.0 is not.
  scores[film] = 1.5;
  std::vector<double> wide = MaskAfter(*bonus, v, {"[rel]"}, scores, ctx);
  CHECK(wide[film] > wide[tv]);
  CHECK_THROWS_AS(MakeSubgraphConstraint(allowed, SubgraphMode::kBonus, v, -1.0), std::invalid_argument);
}

TEST_CASE("value kinds") {
  CHECK(ValueFitsTag("var3", Placeholder::kVar));
  CHECK_FALSE(ValueFitsTag("variable", Placeholder::kVar));
  CHECK_FALSE(ValueFitsTag("dbo:Company", Placeholder::kVar));
  for (Placeholder p : {Placeholder::kEnt, Placeholder::kCct, Placeholder::kRel}) {
    CHECK(ValueFitsTag("dbr:Apple_Inc.", p));
    CHECK(ValueFitsTag("<http://ex.org/a>", p));
    CHECK_FALSE(ValueFitsTag("var0", p));
    CHECK_FALSE(ValueFitsTag("\"a:b\"", p));
  }
  CHECK(ValueFitsTag("\"1955-02-24\"^^xsd:date", Placeholder::kVal));
  CHECK(ValueFitsTag("-3", Placeholder::kVal));
  CHECK(ValueFitsTag("2000", Placeholder::kVal));
  CHECK_FALSE(ValueFitsTag("dbr:A", Placeholder::kVal));
  CHECK(ValueFitsTag("( var0 > 2 )", Placeholder::kCon));
  CHECK_FALSE(ValueFitsTag("var0", Placeholder::kCon));
  CHECK_FALSE(ValueFitsTag("[var]", Placeholder::kVar));
  CHECK_FALSE(ValueFitsTag("", Placeholder::kEnt));

  Vocabulary v = ContentVocab();
  ConstraintPtr c = MakeValueKindConstraint(v);
  DecodeContext ctx;
  std::vector<double> zeros(v.size(), 0.0);
  std::set<std::string> after_var = Unmasked(v, MaskAfter(*c, v, {"[var]"}, zeros, ctx));
  CHECK(after_var.count("var0") == 1);
  CHECK(after_var.count("var1") == 1);
  CHECK(after_var.count("dbr:Apple_Inc.") == 0);
  std::set<std::string> after_rel = Unmasked(v, MaskAfter(*c, v, {"[var]", "var0", "[rel]"}, zeros, ctx));
  CHECK(after_rel.count("dbo:foundedBy") == 1);
  CHECK(after_rel.count("var0") == 0);
  CHECK(MaskAfter(*c, v, {"[var]", "var0"}, zeros, ctx) == zeros);
}

TEST_CASE("greedy path with beam one") {
  Vocabulary v = Vocabulary::Structure();
  std::vector<std::string> path = {"ask", "where", "{", "[var]", "[rel]", "[val]", "}"};
  PathScorer scorer(v, path);
  std::vector<ConstraintPtr> cs = {MakeGrammarConstraint(ConstraintAutomaton::Default(), v)};
  std::vector<Hypothesis> out = BeamSearch(scorer, cs, StructureContext(1, 20));
  REQUIRE(out.size() == 1);
  CHECK(TokenTexts(v, out[0].tokens) == path);
  CHECK(out[0].logprob == 0.0);
}

TEST_CASE("trained template ranks first") {
  Vocabulary v = Vocabulary::Structure();
  const double alpha = 0.1;
  NgramScorer scorer = TrainNgram({kApple}, 3, alpha, v);
  std::vector<ConstraintPtr> cs = {MakeGrammarConstraint(ConstraintAutomaton::Default(), v)};
  std::vector<Hypothesis> out = BeamSearch(scorer, cs, StructureContext(4, 20));
  REQUIRE(!out.empty());
  CHECK(TokenTexts(v, out[0].tokens) == kApple);
  // Nine distinct trigram contexts, each seen once, including the final one predicting EOS.
  CHECK(out[0].logprob == doctest::Approx(9 * std::log((1 + alpha) / (1 + alpha * 31))));
  for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i].logprob <= out[i - 1].logprob);
  nlohmann::json j = HypothesisToJson(v, out[0], 1, true);
  CHECK(j["rank"] == 1);
  CHECK(j["tokens"].size() == kApple.size());
  CHECK(j["valid"] == true);
}

TEST_CASE("all beams dead") {
  Vocabulary v = Vocabulary::Structure();
  std::vector<ConstraintPtr> cs = {MakeGrammarConstraint(ConstraintAutomaton::Default(), v)};
  try {
    BeamSearch(UniformScorer(v), cs, StructureContext(3, 5));
    FAIL("decoding below the shortest sentence succeeded");
  } catch (const AllBeamsDeadError& e) {
    CHECK(e.step() == 0);
  }
  Vocabulary partial({"select", "[var]", "where"});
  std::vector<ConstraintPtr> pcs = {MakeGrammarConstraint(ConstraintAutomaton::Default(), partial)};
  CHECK_THROWS_AS(BeamSearch(UniformScorer(partial), pcs, StructureContext(3, 20)), AllBeamsDeadError);
}

void CheckBeamMatches(const Scorer& scorer, std::span<const ConstraintPtr> cs, DecodeContext ctx,
                      const std::vector<Ranked>& expected) {
  REQUIRE(!expected.empty());
  ctx.beam_size = static_cast<int>(expected.size());
  std::vector<Ranked> got = AsRanked(scorer.vocab(), BeamSearch(scorer, cs, ctx));
  REQUIRE(got.size() == expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].tokens == expected[i].tokens);
    CHECK(got[i].logprob == expected[i].logprob);
  }
}

TEST_CASE("property: constrained stage S beam equals exhaustive filtering") {
  Vocabulary v({"ask", "where", "{", "}", "[ent]", "[rel]", "[var]"});
  std::mt19937 rng(11);
  std::vector<ConstraintPtr> cs = {MakeGrammarConstraint(ConstraintAutomaton::Default(), v)};
  for (int trial = 0; trial < 3; ++trial) {
    NgramScorer scorer = oracle::RandomNgram(v, rng);
    DecodeContext ctx = StructureContext(1, 7);
    std::vector<Ranked> expected = oracle::ExhaustiveDecode(
        scorer, ctx, ctx.max_length, [](const auto& s) { return oracle::GrammarRecognizer::Accepts(s); });
    CHECK(expected.size() == 4);
    CheckBeamMatches(scorer, cs, ctx, expected);
  }
}

TEST_CASE("property: constrained stage S beam equals the ranked grammar language") {
  std::set<std::string> reduced = {"select", "ask", "where", "{", "}", ".", "[ent]", "[rel]", "[var]", "filter",
                                   "[con]"};
  Vocabulary v(std::vector<std::string>(reduced.begin(), reduced.end()));
  std::vector<ConstraintPtr> cs = {MakeGrammarConstraint(ConstraintAutomaton::Default(), v)};
  std::mt19937 rng(21);
  for (int max_len = 7; max_len <= 12; ++max_len) {
    NgramScorer scorer = oracle::RandomNgram(v, rng);
    DecodeContext ctx = StructureContext(1, max_len);
    std::vector<Ranked> expected;
    for (const oracle::Sentence& s : oracle::GrammarGenerator(reduced).Generate(max_len)) {
      std::vector<TokenId> ids = Ids(v, s);
      expected.push_back({s, oracle::SequenceScore(scorer, ids, ctx)});
    }
    std::sort(expected.begin(), expected.end(), [](const Ranked& a, const Ranked& b) {
      if (a.logprob != b.logprob) return a.logprob > b.logprob;
      return a.tokens < b.tokens;
    });
    CAPTURE(max_len);
    CheckBeamMatches(scorer, cs, ctx, expected);
  }
}

TEST_CASE("property: constrained stage C beam equals exhaustive filtering") {
  Vocabulary v({"[ent]", "[rel]", "[var]", "var0", "dbr:Apple_Inc.", "dbo:foundedBy", "ns:film.performance.actor"});
  StructureTemplate s = ParseStructure("ask where { [ent] [rel] [ent] }");
  std::mt19937 rng(12);
  for (int trial = 0; trial < 6; ++trial) {
    NgramScorer scorer = oracle::RandomNgram(v, rng);
    DecodeContext ctx = ContentContext(s, 1);
    bool with_subgraph = trial % 2 == 1;
    std::vector<ConstraintPtr> cs = {MakeStructureConstraint(s, v)};
    if (with_subgraph) cs.push_back(MakeSubgraphConstraint({"dbo:foundedBy"}, SubgraphMode::kHard, v));
    std::vector<Ranked> expected = oracle::ExhaustiveDecode(scorer, ctx, ctx.max_length, [&](const auto& t) {
      return TagsAligned(t, s) && (!with_subgraph || t[3] == "dbo:foundedBy");
    });
    CHECK(expected.size() == (with_subgraph ? 16u : 64u));
    CheckBeamMatches(scorer, cs, ctx, expected);
  }
}

TEST_CASE("property: randomized decodes are sound and deterministic") {
  Vocabulary sv = Vocabulary::Structure();
  std::vector<ConstraintPtr> grammar = {MakeGrammarConstraint(ConstraintAutomaton::Default(), sv)};
  std::vector<StructureTemplate> templates;
  oracle::GrammarGenerator gen({"select", "ask", "where", "{", "}", ".", "[ent]", "[cct]", "[rel]", "[var]",
                                "[val]", "filter", "[con]", "limit"});
  for (const oracle::Sentence& sentence : gen.Generate(12)) {
    StructureTemplate t;
    for (const std::string& x : sentence) t.tokens.push_back(StructureToken::Parse(x));
    templates.push_back(t);
  }
  Vocabulary cv = ContentVocab();
  std::mt19937 rng(13);
  int invalid = 0, misaligned = 0;
  for (int i = 0; i < 200; ++i) {
    int beam = 1 + static_cast<int>(rng() % 10);
    NgramScorer ss = oracle::RandomNgram(sv, rng);
    DecodeContext sctx = StructureContext(beam, 7 + static_cast<int>(rng() % 20));
    std::vector<Hypothesis> s_out = BeamSearch(ss, grammar, sctx);
    CHECK(!s_out.empty());
    CHECK(s_out.size() <= static_cast<std::size_t>(beam));
    for (const Hypothesis& h : s_out) {
      invalid += !ValidateStructure(ParseStructure(oracle::Join(TokenTexts(sv, h.tokens))).tokens).valid;
      CHECK(static_cast<int>(h.tokens.size()) <= sctx.max_length);
    }
    const StructureTemplate& t = templates[rng() % templates.size()];
    NgramScorer cs = oracle::RandomNgram(cv, rng);
    std::vector<ConstraintPtr> content = {MakeStructureConstraint(t, cv)};
    if (rng() % 2) content.push_back(MakeSubgraphConstraint({"dbo:foundedBy"}, SubgraphMode::kHard, cv));
    DecodeContext cctx = ContentContext(t, beam);
    std::vector<Hypothesis> c_out = BeamSearch(cs, content, cctx);
    CHECK(!c_out.empty());
    for (const Hypothesis& h : c_out) misaligned += !TagsAligned(TokenTexts(cv, h.tokens), t);
    std::vector<Hypothesis> again = BeamSearch(cs, content, cctx);
    REQUIRE(again.size() == c_out.size());
    for (std::size_t k = 0; k < again.size(); ++k) {
      CHECK(again[k].tokens == c_out[k].tokens);
      CHECK(again[k].logprob == c_out[k].logprob);
    }
  }
  CHECK(invalid == 0);
  CHECK(misaligned == 0);
}

TEST_CASE("property: masking never raises a score") {
  Vocabulary v = ContentVocab();
  StructureTemplate s = ParseStructure("select [var] where { [ent] [rel] [var] . [var] [rel] [val] . }");
  std::vector<ConstraintPtr> all = {
      MakeStructureConstraint(s, v),
      MakeSubgraphConstraint({"dbo:foundedBy"}, SubgraphMode::kHard, v),
      MakeSubgraphConstraint({"ns:film.performance.actor"}, SubgraphMode::kBonus, v, 0.7),
      MakeGrammarConstraint(ConstraintAutomaton::Default(), v),
      MakeValueKindConstraint(v),
  };
  DecodeContext ctx = ContentContext(s, 2);
  std::mt19937 rng(14);
  std::normal_distribution<double> score(-3.0, 2.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<TokenId> prefix(rng() % 12);
    for (TokenId& t : prefix) t = static_cast<TokenId>(rng() % (v.size() - 1));
    std::vector<double> current(v.size());
    for (double& x : current) x = score(rng);
    std::vector<std::size_t> order = {0, 1, 2, 3, 4};
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k : order) {
      ConstraintState st = all[k]->Initial(ctx);
      for (TokenId t : prefix) st = all[k]->Advance(st, t);
      std::vector<double> next = current;
      all[k]->Mask(st, prefix, next, ctx);
      for (std::size_t i = 0; i < next.size(); ++i) CHECK(next[i] <= current[i]);
      current = std::move(next);
    }
  }
}
