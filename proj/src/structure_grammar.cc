/*!
 *  Copyright (c) 2024 by Contributors
 * \file src/structure_grammar.cc
 */
#include "kgsparql/structure_grammar.h"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace kgsparql {

namespace {

constexpr std::array<std::string_view, StructureToken::kVocabSize> kTokenText = {
    "select", "ask",    "where", "{",     "}",      ".",     "(",      ")",
    "as",     "count",  "min",   "max",   "sum",    "avg",   "distinct", "filter",
    "order",  "by",     "group", "having", "limit", "offset", "asc",   "desc",
    "[ent]",  "[cct]",  "[rel]", "[var]", "[val]",  "[con]", "</s>"};

StructureToken Kw(std::string_view text) { return StructureToken::Parse(text); }

}  // namespace

std::string_view ToString(Placeholder tag) {
  return kTokenText[StructureToken::kNumKeywords + static_cast<int>(tag)];
}

std::optional<Placeholder> ParsePlaceholder(std::string_view text) {
  for (Placeholder p : kAllPlaceholders) {
    if (ToString(p) == text) return p;
  }
  return std::nullopt;
}

UnknownTokenError::UnknownTokenError(std::string token)
    : Error("unknown structure token '" + token + "'"), token_(std::move(token)) {}

/******************* StructureToken *******************/

std::optional<StructureToken> StructureToken::FromString(std::string_view text) {
  for (int i = 0; i < kVocabSize; ++i) {
    if (kTokenText[i] == text) return StructureToken(i);
  }
  return std::nullopt;
}

StructureToken StructureToken::Parse(std::string_view text) {
  auto tok = FromString(text);
  if (!tok) throw UnknownTokenError(std::string(text));
  return *tok;
}

StructureToken StructureToken::FromId(int id) {
  if (id < 0 || id >= kVocabSize) throw std::out_of_range("structure token id");
  return StructureToken(id);
}

StructureToken StructureToken::Of(Placeholder tag) {
  return StructureToken(kNumKeywords + static_cast<int>(tag));
}

std::string_view StructureToken::text() const { return kTokenText[id_]; }

std::optional<Placeholder> StructureToken::placeholder() const {
  if (!is_placeholder()) return std::nullopt;
  return static_cast<Placeholder>(id_ - kNumKeywords);
}

const std::vector<StructureToken>& StructureVocabulary() {
  static const std::vector<StructureToken> vocab = [] {
    std::vector<StructureToken> v;
    for (int i = 0; i < StructureToken::kVocabSize; ++i) v.push_back(StructureToken::FromId(i));
    return v;
  }();
  return vocab;
}

/******************* StructureTemplate *******************/

std::string StructureTemplate::ToString() const {
  std::string out;
  for (StructureToken t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.text();
  }
  return out;
}

std::vector<Placeholder> StructureTemplate::Placeholders() const {
  std::vector<Placeholder> tags;
  for (StructureToken t : tokens) {
    if (auto p = t.placeholder()) tags.push_back(*p);
  }
  return tags;
}

StructureTemplate ParseStructure(std::string_view text) {
  StructureTemplate out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) out.tokens.push_back(StructureToken::Parse(word));
  return out;
}

/******************* ConstraintAutomaton *******************/

ConstraintAutomaton::StateId ConstraintAutomaton::AddState(bool accepting, std::string name) {
  std::array<StateId, StructureToken::kVocabSize> row;
  row.fill(kNoState);
  transitions_.push_back(row);
  accepting_.push_back(accepting);
  names_.push_back(std::move(name));
  return static_cast<StateId>(transitions_.size() - 1);
}

void ConstraintAutomaton::AddEdge(StateId from, StructureToken token, StateId to) {
  if (token.is_eos()) throw std::logic_error("EOS transitions are implicit");
  StateId& slot = transitions_.at(from)[token.id()];
  if (slot != kNoState && slot != to) {
    throw std::logic_error("nondeterministic transition on '" + std::string(token.text()) + "'");
  }
  slot = to;
}

ConstraintAutomaton ConstraintAutomaton::BuildStructureGrammar() {
  ConstraintAutomaton a;
  const StructureToken ent = StructureToken::Of(Placeholder::kEnt);
  const StructureToken cct = StructureToken::Of(Placeholder::kCct);
  const StructureToken rel = StructureToken::Of(Placeholder::kRel);
  const StructureToken var = StructureToken::Of(Placeholder::kVar);
  const StructureToken val = StructureToken::Of(Placeholder::kVal);
  const StructureToken con = StructureToken::Of(Placeholder::kCon);

  a.start_ = a.AddState(false, "start");

  // Group body, instantiated once per query form since ASK admits no modifiers.
  auto build_group = [&](const std::string& form, StateId end) {
    StateId open = a.AddState(false, form + "_group_open");
    StateId subj = a.AddState(false, form + "_subject");
    StateId pred = a.AddState(false, form + "_predicate");
    StateId obj = a.AddState(false, form + "_object");
    StateId item = a.AddState(false, form + "_item_done");
    StateId filter = a.AddState(false, form + "_filter");
    for (StateId from : {open, obj, item}) {
      for (StructureToken s : {ent, var, cct}) a.AddEdge(from, s, subj);
      a.AddEdge(from, Kw("filter"), filter);
    }
    a.AddEdge(subj, rel, pred);
    for (StructureToken o : {ent, cct, var, val}) a.AddEdge(pred, o, obj);
    a.AddEdge(obj, Kw("."), item);
    a.AddEdge(filter, con, item);
    a.AddEdge(obj, Kw("}"), end);
    a.AddEdge(item, Kw("}"), end);
    return open;
  };

  // ASK.
  StateId ask = a.AddState(false, "ask");
  StateId ask_where = a.AddState(false, "ask_where");
  StateId ask_end = a.AddState(true, "ask_end");
  a.AddEdge(a.start_, Kw("ask"), ask);
  a.AddEdge(ask, Kw("where"), ask_where);
  a.AddEdge(ask_where, Kw("{"), build_group("ask", ask_end));

  // SELECT projection.
  StateId select = a.AddState(false, "select");
  StateId distinct = a.AddState(false, "select_distinct");
  StateId proj_var = a.AddState(false, "proj_var");
  StateId agg_open = a.AddState(false, "agg_open");
  StateId agg_fn = a.AddState(false, "agg_function");
  StateId agg_arg_open = a.AddState(false, "agg_arg_open");
  StateId agg_arg = a.AddState(false, "agg_arg");
  StateId agg_arg_close = a.AddState(false, "agg_arg_close");
  StateId agg_as = a.AddState(false, "agg_as");
  StateId agg_alias = a.AddState(false, "agg_alias");
  StateId agg_close = a.AddState(false, "agg_close");
  StateId select_where = a.AddState(false, "select_where");
  a.AddEdge(a.start_, Kw("select"), select);
  a.AddEdge(select, Kw("distinct"), distinct);
  a.AddEdge(select, var, proj_var);
  a.AddEdge(distinct, var, proj_var);
  a.AddEdge(proj_var, var, proj_var);
  a.AddEdge(proj_var, Kw("where"), select_where);
  a.AddEdge(select, Kw("("), agg_open);
  for (std::string_view fn : {"count", "min", "max", "sum", "avg"}) a.AddEdge(agg_open, Kw(fn), agg_fn);
  a.AddEdge(agg_fn, Kw("("), agg_arg_open);
  a.AddEdge(agg_arg_open, var, agg_arg);
  a.AddEdge(agg_arg, Kw(")"), agg_arg_close);
  a.AddEdge(agg_arg_close, Kw("as"), agg_as);
  a.AddEdge(agg_as, var, agg_alias);
  a.AddEdge(agg_alias, Kw(")"), agg_close);
  a.AddEdge(agg_close, Kw("where"), select_where);

  // SELECT body and solution modifiers.
  StateId mods = a.AddState(true, "modifiers");
  a.AddEdge(select_where, Kw("{"), build_group("select", mods));
  StateId order = a.AddState(false, "order");
  StateId order_by = a.AddState(false, "order_by");
  StateId order_dir = a.AddState(false, "order_direction");
  StateId group = a.AddState(false, "group");
  StateId group_by = a.AddState(false, "group_by");
  StateId group_vars = a.AddState(true, "group_by_vars");
  StateId having = a.AddState(false, "having");
  StateId limit = a.AddState(false, "limit");
  StateId offset = a.AddState(false, "offset");
  for (StateId from : {mods, group_vars}) {
    a.AddEdge(from, Kw("order"), order);
    a.AddEdge(from, Kw("group"), group);
    a.AddEdge(from, Kw("having"), having);
    a.AddEdge(from, Kw("limit"), limit);
    a.AddEdge(from, Kw("offset"), offset);
  }
  a.AddEdge(order, Kw("by"), order_by);
  a.AddEdge(order_by, Kw("asc"), order_dir);
  a.AddEdge(order_by, Kw("desc"), order_dir);
  for (StateId from : {order_by, order_dir}) {
    a.AddEdge(from, var, mods);
    a.AddEdge(from, con, mods);
  }
  a.AddEdge(group, Kw("by"), group_by);
  a.AddEdge(group_by, var, group_vars);
  a.AddEdge(group_vars, var, group_vars);
  a.AddEdge(having, con, mods);
  a.AddEdge(limit, val, mods);
  a.AddEdge(offset, val, mods);
  return a;
}

const ConstraintAutomaton& ConstraintAutomaton::Default() {
  static const ConstraintAutomaton automaton = BuildStructureGrammar();
  return automaton;
}

ConstraintAutomaton::StateId ConstraintAutomaton::Next(StateId state, StructureToken token) const {
  if (state == kNoState || token.is_eos()) return kNoState;
  return transitions_.at(state)[token.id()];
}

std::vector<StructureToken> ConstraintAutomaton::NextTokens(StateId state) const {
  std::vector<StructureToken> out;
  const auto& row = transitions_.at(state);
  for (int id = 0; id < StructureToken::kVocabSize; ++id) {
    if (row[id] != kNoState) out.push_back(StructureToken::FromId(id));
  }
  if (accepting_[state]) out.push_back(StructureToken::Eos());
  return out;
}

std::vector<int> ConstraintAutomaton::MinCompletion(
    const std::array<bool, StructureToken::kVocabSize>& allowed) const {
  // Backward BFS from accepting states over allowed edges.
  std::vector<std::vector<StateId>> reverse(transitions_.size());
  for (StateId s = 0; s < num_states(); ++s) {
    for (int id = 0; id < StructureToken::kVocabSize; ++id) {
      if (allowed[id] && transitions_[s][id] != kNoState) reverse[transitions_[s][id]].push_back(s);
    }
  }
  std::vector<int> dist(transitions_.size(), -1);
  std::deque<StateId> queue;
  for (StateId s = 0; s < num_states(); ++s) {
    if (accepting_[s]) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (StateId p : reverse[s]) {
      if (dist[p] == -1) {
        dist[p] = dist[s] + 1;
        queue.push_back(p);
      }
    }
  }
  return dist;
}

ConstraintAutomaton::StateId ConstraintAutomaton::Run(std::span<const StructureToken> tokens) const {
  StateId state = start_;
  for (StructureToken t : tokens) {
    state = Next(state, t);
    if (state == kNoState) return kNoState;
  }
  return state;
}

std::string ConstraintAutomaton::ToDot() const {
  std::ostringstream out;
  out << "digraph structure_grammar {\n  rankdir=LR;\n";
  for (StateId s = 0; s < num_states(); ++s) {
    out << "  s" << s << " [label=\"" << names_[s] << "\""
        << (accepting_[s] ? ", shape=doublecircle" : ", shape=circle") << "];\n";
  }
  for (StateId s = 0; s < num_states(); ++s) {
    // Parallel edges to the same target are merged into one label.
    std::vector<std::pair<StateId, std::string>> edges;
    for (int id = 0; id < StructureToken::kVocabSize; ++id) {
      StateId to = transitions_[s][id];
      if (to == kNoState) continue;
      auto it = std::find_if(edges.begin(), edges.end(), [to](const auto& e) { return e.first == to; });
      std::string label(StructureToken::FromId(id).text());
      if (it == edges.end()) {
        edges.emplace_back(to, label);
      } else {
        it->second += " | " + label;
      }
    }
    for (const auto& [to, label] : edges) {
      out << "  s" << s << " -> s" << to << " [label=\"" << label << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

/******************* Validation and classification *******************/

ValidationResult ValidateStructure(std::span<const StructureToken> tokens,
                                   const ConstraintAutomaton& automaton) {
  ValidationResult result;
  auto state = automaton.start();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto next = automaton.Next(state, tokens[i]);
    if (next == ConstraintAutomaton::kNoState) {
      result.position = i;
      result.expected = automaton.NextTokens(state);
      return result;
    }
    state = next;
  }
  if (!automaton.IsAccepting(state)) {
    result.position = tokens.size();
    result.expected = automaton.NextTokens(state);
    return result;
  }
  result.valid = true;
  result.position = tokens.size();
  return result;
}

ValidationResult ValidateStructure(std::string_view text, const ConstraintAutomaton& automaton) {
  StructureTemplate structure = ParseStructure(text);
  return ValidateStructure(structure.tokens, automaton);
}

std::string ComplexityLabel::ToString() const {
  std::string out = multi_hop() ? "Multi-hop" : "Single-hop";
  const char* plural = multi_hop() ? "s" : "";
  if (constraint && aggregate) {
    out += std::string(" with constraint") + plural + " and aggregate" + plural;
  } else if (constraint) {
    out += std::string(" with constraint") + plural;
  } else if (aggregate) {
    out += std::string(" with aggregate") + plural;
  }
  return out;
}

ComplexityLabel ClassifyStructure(const StructureTemplate& structure) {
  ComplexityLabel label;
  for (StructureToken t : structure.tokens) {
    std::string_view text = t.text();
    if (t == StructureToken::Of(Placeholder::kRel)) ++label.hops;
    if (text == "count" || text == "min" || text == "max" || text == "sum" || text == "avg") {
      label.aggregate = true;
    }
    if (text == "filter" || text == "having" || text == "order" || text == "group") {
      label.constraint = true;
    }
  }
  return label;
}

}  // namespace kgsparql
