/*!
 *  Copyright (c) 2024 by Contributors
 * \file src/corpus.cc
 */
#include "kgsparql/corpus.h"

#include <fstream>
#include <set>
#include <sstream>

#include "kgsparql/scaffold.h"

namespace kgsparql {

namespace {
constexpr Split kSplits[] = {Split::kTrain, Split::kValid, Split::kTest};

nlohmann::json ParseJson(std::string_view text, std::string_view what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

std::string RequireString(const nlohmann::json& obj, const char* key, std::size_t index) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw FormatError("dataset record " + std::to_string(index) + ": '" + key +
                      "' must be a nonempty string");
  }
  return it->get<std::string>();
}
}  // namespace

std::string_view ToString(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValid:
      return "valid";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split ParseSplit(std::string_view text) {
  for (Split s : kSplits) {
    if (ToString(s) == text) return s;
  }
  throw FormatError("unknown split '" + std::string(text) + "'");
}

std::vector<DatasetRecord> ParseDataset(std::string_view json_text) {
  nlohmann::json doc = ParseJson(json_text, "dataset");
  if (!doc.is_array()) throw FormatError("dataset: expected a JSON array");
  std::vector<DatasetRecord> records;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_object()) throw FormatError("dataset record " + std::to_string(i) + ": not an object");
    records.push_back({RequireString(doc[i], "question", i), RequireString(doc[i], "sparql", i),
                       ParseSplit(RequireString(doc[i], "split", i))});
  }
  return records;
}

std::vector<DatasetRecord> LoadDataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseDataset(buf.str());
}

std::vector<DatasetRecord> ParseLcQuad(std::string_view json_text, Split split) {
  nlohmann::json doc = ParseJson(json_text, "lc-quad");
  if (!doc.is_array()) throw FormatError("lc-quad: expected a JSON array");
  std::vector<DatasetRecord> records;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    records.push_back({RequireString(doc[i], "corrected_question", i),
                       RequireString(doc[i], "sparql_query", i), split});
  }
  return records;
}

StructureStats CorpusStats(const std::vector<DatasetRecord>& dataset, const PrefixTable& prefixes,
                           const OntologySnapshot* ontology) {
  StructureStats stats;
  std::vector<std::string> test_structures;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const DatasetRecord& r = dataset[i];
    std::string structure;
    try {
      structure = Decompose(Canonicalize(r.sparql, prefixes), ontology).structure.ToString();
    } catch (const Error& e) {
      stats.failures.push_back({i, e.what()});
      continue;
    }
    auto s = static_cast<std::size_t>(r.split);
    ++stats.records[s];
    ++stats.structures[s][structure];
    if (r.split == Split::kTest) test_structures.push_back(structure);
  }
  for (std::size_t s = 0; s < 3; ++s) stats.unique[s] = stats.structures[s].size();
  const auto& train = stats.structures[static_cast<std::size_t>(Split::kTrain)];
  for (const auto& [structure, count] : stats.structures[static_cast<std::size_t>(Split::kTest)]) {
    if (train.count(structure)) continue;
    ++stats.unseen_structures;
    stats.unseen_questions += count;
  }
  return stats;
}

nlohmann::json StructureStats::ToJson() const {
  nlohmann::json splits = nlohmann::json::object();
  for (Split s : kSplits) {
    auto i = static_cast<std::size_t>(s);
    splits[std::string(kgsparql::ToString(s))] = {{"records", records[i]}, {"unique_structures", unique[i]}};
  }
  nlohmann::json fails = nlohmann::json::array();
  for (const RecordFailure& f : failures) fails.push_back({{"index", f.index}, {"message", f.message}});
  return {{"splits", splits},
          {"unseen_structures", unseen_structures},
          {"unseen_questions", unseen_questions},
          {"failures", fails}};
}

std::string StructureStats::ToText() const {
  std::ostringstream os;
  for (Split s : kSplits) {
    auto i = static_cast<std::size_t>(s);
    os << kgsparql::ToString(s) << ": records " << records[i] << ", unique structures " << unique[i] << '\n';
  }
  os << "#S " << unseen_structures << '\n';
  os << "#Q " << unseen_questions << '\n';
  os << "failures " << failures.size() << '\n';
  for (const RecordFailure& f : failures) os << "  record " << f.index << ": " << f.message << '\n';
  return os.str();
}

}  // namespace kgsparql
