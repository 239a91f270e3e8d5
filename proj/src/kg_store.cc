/*!
 *  Copyright (c) 2024 by Contributors
 * \file src/kg_store.cc
 */
#include "kgsparql/kg_store.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace kgsparql {

ParseError::ParseError(std::size_t line, const std::string& detail)
    : Error("n-triples line " + std::to_string(line) + ": " + detail), line_(line) {}

/******************* Store *******************/

KgStore::KgStore(std::vector<KgTriple> triples) : triples_(std::move(triples)) {
  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    out_[triples_[i].subject].push_back(i);
    in_[triples_[i].object].push_back(i);
  }
}

const std::vector<std::size_t>& KgStore::Outgoing(const std::string& node) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = out_.find(node);
  return it == out_.end() ? kEmpty : it->second;
}

const std::vector<std::size_t>& KgStore::Incoming(const std::string& node) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = in_.find(node);
  return it == in_.end() ? kEmpty : it->second;
}

bool KgStore::Contains(const std::string& node) const { return out_.count(node) || in_.count(node); }

bool IsLiteralNode(std::string_view node) { return !node.empty() && node.front() == '"'; }

namespace {

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t number) : s_(line), line_(number) {}

  KgTriple Run() {
    KgTriple t;
    t.subject = Node(false);
    t.predicate = Iri();
    t.object = Node(true);
    Skip();
    if (pos_ >= s_.size() || s_[pos_] != '.') Fail("expected '.'");
    ++pos_;
    Skip();
    if (pos_ < s_.size() && s_[pos_] != '#') Fail("trailing characters");
    return t;
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    throw ParseError(line_, what + " at column " + std::to_string(pos_ + 1));
  }

  void Skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  std::string Iri() {
    Skip();
    if (pos_ >= s_.size() || s_[pos_] != '<') Fail("expected IRI");
    auto end = s_.find('>', pos_);
    if (end == std::string_view::npos) Fail("unterminated IRI");
    std::string iri(s_.substr(pos_ + 1, end - pos_ - 1));
    if (iri.empty() || iri.find_first_of(" \t\"<") != std::string::npos) Fail("invalid IRI");
    pos_ = end + 1;
    return iri;
  }

  std::string Blank() {
    std::size_t start = pos_;
    pos_ += 2;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                                s_[pos_] == '-' || s_[pos_] == '.')) {
      ++pos_;
    }
    while (pos_ > start + 2 && s_[pos_ - 1] == '.') --pos_;
    if (pos_ == start + 2) Fail("empty blank node label");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string Literal() {
    std::size_t start = pos_++;
    while (pos_ < s_.size() && s_[pos_] != '"') pos_ += s_[pos_] == '\\' ? 2 : 1;
    if (pos_ >= s_.size()) Fail("unterminated literal");
    ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '@') {
      ++pos_;
      std::size_t tag = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-')) ++pos_;
      if (pos_ == tag) Fail("empty language tag");
    } else if (s_.substr(pos_, 2) == "^^") {
      pos_ += 2;
      Iri();
    }
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string Node(bool allow_literal) {
    Skip();
    if (pos_ >= s_.size()) Fail("unexpected end of line");
    if (s_[pos_] == '<') return Iri();
    if (s_.substr(pos_, 2) == "_:") return Blank();
    if (s_[pos_] == '"' && allow_literal) return Literal();
    Fail(allow_literal ? "expected IRI, blank node or literal" : "expected IRI or blank node");
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

KgStore KgStore::Parse(std::string_view ntriples) {
  std::vector<KgTriple> triples;
  std::size_t number = 0;
  while (!ntriples.empty()) {
    ++number;
    auto nl = ntriples.find('\n');
    std::string_view line = ntriples.substr(0, nl);
    ntriples.remove_prefix(nl == std::string_view::npos ? ntriples.size() : nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    triples.push_back(LineParser(line, number).Run());
  }
  return KgStore(std::move(triples));
}

KgStore KgStore::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open knowledge graph " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

/******************* Relevance *******************/

std::string_view RelationLocalName(std::string_view relation) {
  auto cut = relation.find_last_of("/#");
  return cut == std::string_view::npos ? relation : relation.substr(cut + 1);
}

std::set<std::string> LabelTokens(std::string_view relation) {
  std::set<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.insert(std::move(cur));
    cur.clear();
  };
  std::string_view local = RelationLocalName(relation);
  for (std::size_t i = 0; i < local.size(); ++i) {
    unsigned char c = local[i];
    if (!std::isalnum(c)) {
      flush();
      continue;
    }
    if (std::isupper(c) && i > 0 && std::islower(static_cast<unsigned char>(local[i - 1]))) flush();
    cur.push_back(static_cast<char>(std::tolower(c)));
  }
  flush();
  return tokens;
}

std::set<std::string> QuestionTerms(std::string_view question) {
  std::set<std::string> terms;
  std::string cur;
  for (char ch : question) {
    unsigned char c = ch;
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      terms.insert(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) terms.insert(std::move(cur));
  return terms;
}

double RelationRelevance(std::string_view relation, const std::set<std::string>& question_terms) {
  constexpr double kEpsilon = 0.01;
  std::set<std::string> label = LabelTokens(relation);
  std::size_t overlap = std::count_if(label.begin(), label.end(),
                                      [&](const std::string& t) { return question_terms.count(t) > 0; });
  return (static_cast<double>(overlap) + kEpsilon) / (static_cast<double>(label.size()) + kEpsilon);
}

/******************* Retrieval *******************/

bool PathBefore(const RelationPath& x, const RelationPath& y) {
  if (x.score != y.score) return x.score > y.score;
  if (x.start != y.start) return x.start < y.start;
  return x.steps < y.steps;
}

Subgraph RetrieveSubgraph(const KgStore& store, const std::vector<std::string>& topic_entities,
                          const std::set<std::string>& question_terms, const RetrievalOptions& options) {
  if (options.top_k == 0) throw std::invalid_argument("top_k must be >= 1");
  if (options.max_hops == 0) throw std::invalid_argument("max_hops must be >= 1");

  Subgraph result;
  std::unordered_map<std::string, double> relevance;
  auto score_of = [&](const std::string& rel) {
    auto it = relevance.find(rel);
    if (it == relevance.end()) it = relevance.emplace(rel, RelationRelevance(rel, question_terms)).first;
    return it->second;
  };

  auto later = [](const RelationPath& x, const RelationPath& y) { return PathBefore(y, x); };
  std::priority_queue<RelationPath, std::vector<RelationPath>, decltype(later)> frontier(later);

  auto expand = [&](const RelationPath& path) {
    const std::string& at = path.terminal();
    if (path.steps.size() >= options.max_hops || IsLiteralNode(at)) return;
    auto visited = [&](const std::string& node) {
      if (node == path.start) return true;
      return std::any_of(path.steps.begin(), path.steps.end(), [&](const PathStep& s) { return s.node == node; });
    };
    auto push = [&](const std::string& rel, EdgeDirection dir, const std::string& node) {
      if (visited(node)) return;
      double score = path.score * score_of(rel);
      if (score < options.min_score) return;
      RelationPath next = path;
      next.steps.push_back({rel, dir, node});
      next.score = score;
      frontier.push(std::move(next));
    };
    for (std::size_t i : store.Outgoing(at)) {
      const KgTriple& t = store.triples()[i];
      push(t.predicate, EdgeDirection::kForward, t.object);
    }
    for (std::size_t i : store.Incoming(at)) {
      const KgTriple& t = store.triples()[i];
      push(t.predicate, EdgeDirection::kBackward, t.subject);
    }
  };

  std::set<std::string> topics;
  for (const std::string& topic : topic_entities) {
    if (!topics.insert(topic).second) continue;
    if (!store.Contains(topic)) {
      result.warnings.push_back("UnknownEntity: " + topic);
      continue;
    }
    expand(RelationPath{topic, {}, 1.0});
  }

  while (!frontier.empty() && result.paths.size() < options.top_k) {
    RelationPath path = frontier.top();
    frontier.pop();
    expand(path);
    result.paths.push_back(std::move(path));
  }
  result.relations = RelationsOf(result);
  return result;
}

std::set<std::string> RelationsOf(const Subgraph& subgraph) {
  std::set<std::string> relations;
  for (const RelationPath& p : subgraph.paths) {
    for (const PathStep& s : p.steps) relations.insert(s.relation);
  }
  return relations;
}

nlohmann::json SubgraphToJson(const Subgraph& subgraph) {
  nlohmann::json paths = nlohmann::json::array();
  for (const RelationPath& p : subgraph.paths) {
    nlohmann::json rels = nlohmann::json::array(), dirs = nlohmann::json::array();
    for (const PathStep& s : p.steps) {
      rels.push_back(s.relation);
      dirs.push_back(s.direction == EdgeDirection::kForward ? "out" : "in");
    }
    paths.push_back({{"start", p.start},
                     {"relations", rels},
                     {"directions", dirs},
                     {"terminal", p.terminal()},
                     {"score", p.score}});
  }
  return {{"paths", paths}, {"relations", subgraph.relations}, {"warnings", subgraph.warnings}};
}

}  // namespace kgsparql
