/*!
 *  Copyright (c) 2024 by Contributors
 * \file src/ontology.cc
 */
#include "kgsparql/ontology.h"

#include <fstream>
#include <map>
#include <sstream>

namespace kgsparql {

namespace {

constexpr std::string_view kListNames[] = {"concepts", "relations", "entities"};

std::string JoinLabels(const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ", ";
    out += labels[i];
  }
  return out;
}

std::string_view LocalName(std::string_view term) {
  if (!term.empty() && term.front() == '<') {
    term = term.substr(1, term.size() >= 2 ? term.size() - 2 : 0);
    auto cut = term.find_last_of("/#");
    return cut == std::string_view::npos ? term : term.substr(cut + 1);
  }
  auto colon = term.find(':');
  return colon == std::string_view::npos ? term : term.substr(colon + 1);
}

bool Matches(std::string_view label, std::string_view term) {
  if (label == term) return true;
  return label.find(':') == std::string_view::npos && LocalName(term) == label;
}

}  // namespace

DuplicateLabelError::DuplicateLabelError(std::string label, std::vector<std::string> lists)
    : Error([&] {
        std::string msg = "duplicate ontology label '" + label + "' in";
        for (const auto& l : lists) msg += " " + l;
        return msg;
      }()),
      label_(std::move(label)),
      lists_(std::move(lists)) {}

OntologySnapshot::OntologySnapshot(std::vector<std::string> concepts,
                                   std::vector<std::string> relations,
                                   std::vector<std::string> entities)
    : concepts_(std::move(concepts)), relations_(std::move(relations)), entities_(std::move(entities)) {
  std::map<std::string, std::vector<std::string>> seen;
  const std::vector<std::string>* lists[] = {&concepts_, &relations_, &entities_};
  for (int i = 0; i < 3; ++i) {
    for (const std::string& label : *lists[i]) seen[label].emplace_back(kListNames[i]);
  }
  for (auto& [label, where] : seen) {
    if (where.size() > 1) throw DuplicateLabelError(label, where);
  }
}

std::optional<LabelKind> OntologySnapshot::Classify(std::string_view term) const {
  auto in = [term](const std::vector<std::string>& labels) {
    for (const std::string& l : labels) {
      if (Matches(l, term)) return true;
    }
    return false;
  };
  if (in(concepts_)) return LabelKind::kConcept;
  if (in(relations_)) return LabelKind::kRelation;
  if (in(entities_)) return LabelKind::kEntity;
  return std::nullopt;
}

OntologySnapshot ParseOntology(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("ontology: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("ontology: expected a JSON object");
  std::vector<std::string> lists[3];
  for (int i = 0; i < 3; ++i) {
    auto it = doc.find(std::string(kListNames[i]));
    if (it == doc.end()) continue;
    if (!it->is_array()) throw FormatError("ontology: '" + std::string(kListNames[i]) + "' is not an array");
    for (const auto& label : *it) {
      if (!label.is_string() || label.get<std::string>().empty()) {
        throw FormatError("ontology: labels must be nonempty strings");
      }
      lists[i].push_back(label.get<std::string>());
    }
  }
  return OntologySnapshot(std::move(lists[0]), std::move(lists[1]), std::move(lists[2]));
}

OntologySnapshot LoadOntology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ontology " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseOntology(buf.str());
}

std::string Verbalize(const OntologySnapshot& ontology) {
  return "ontology: concepts: " + JoinLabels(ontology.concepts()) +
         "; relations: " + JoinLabels(ontology.relations()) +
         "; entities: " + JoinLabels(ontology.entities());
}

OntologySnapshot ParseVerbalization(std::string_view text) {
  std::string_view rest = text;
  std::vector<std::string> lists[3];
  auto expect = [&rest](std::string_view lit) {
    if (rest.substr(0, lit.size()) != lit) {
      throw FormatError("verbalization: expected '" + std::string(lit) + "'");
    }
    rest.remove_prefix(lit.size());
  };
  expect("ontology: ");
  for (int i = 0; i < 3; ++i) {
    expect(std::string(kListNames[i]) + ": ");
    std::string_view section = rest;
    if (i < 2) {
      auto end = rest.find("; ");
      if (end == std::string_view::npos) throw FormatError("verbalization: missing section separator");
      section = rest.substr(0, end);
      rest.remove_prefix(end + 2);
    } else {
      rest = {};
    }
    while (!section.empty()) {
      auto comma = section.find(", ");
      lists[i].emplace_back(section.substr(0, comma));
      if (comma == std::string_view::npos) break;
      section.remove_prefix(comma + 2);
    }
  }
  return OntologySnapshot(std::move(lists[0]), std::move(lists[1]), std::move(lists[2]));
}

/******************* Prompts *******************/

nlohmann::json PromptLayout::ToJson() const {
  nlohmann::json segs = nlohmann::json::array();
  for (const PromptSegment& s : segments) {
    segs.push_back({{s.kind == PromptSegment::Kind::kSlot ? "slot" : "text", s.value}});
  }
  return {{"stage", stage == PromptStage::kStructure ? "S" : "C"}, {"segments", segs}};
}

Prompt BuildPrompt(PromptStage stage, std::string_view question, const OntologySnapshot& ontology,
                   const std::optional<StructureTemplate>& structure) {
  std::string prefix(kPromptPrefix);
  if (stage == PromptStage::kContent) {
    if (!structure) throw MissingStructureError();
    prefix += " " + structure->ToString();
  }
  std::string ontology_text = Verbalize(ontology);

  Prompt prompt;
  prompt.layout.stage = stage;
  prompt.layout.segments = {
      PromptSegment::Slot("v_B"), PromptSegment::Text(prefix),
      PromptSegment::Slot("v_Q"), PromptSegment::Text(std::string(question)),
      PromptSegment::Slot("v_G"), PromptSegment::Text(ontology_text),
      PromptSegment::Slot("v_E"),
  };
  std::string separator = stage == PromptStage::kContent ? " | " : " ";
  prompt.text = prefix + separator + std::string(question) + " | " + ontology_text;
  return prompt;
}

}  // namespace kgsparql
