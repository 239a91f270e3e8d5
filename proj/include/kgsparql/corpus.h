/*!
 *  Copyright (c) 2024 by Contributors
 * \file kgsparql/corpus.h
 * \brief Question/query datasets and per-split structure statistics.
 */
#ifndef KGSPARQL_CORPUS_H_
#define KGSPARQL_CORPUS_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kgsparql/error.h"
#include "kgsparql/ontology.h"
#include "kgsparql/sparql.h"

namespace kgsparql {

enum class Split { kTrain = 0, kValid = 1, kTest = 2 };

std::string_view ToString(Split split);
/*! \throws FormatError */
Split ParseSplit(std::string_view text);

struct DatasetRecord {
  std::string question;
  std::string sparql;
  Split split = Split::kTrain;
};

/*! \brief JSON array of {"question","sparql","split"}. \throws FormatError */
std::vector<DatasetRecord> ParseDataset(std::string_view json_text);
/*! \throws IoError, FormatError */
std::vector<DatasetRecord> LoadDataset(const std::filesystem::path& path);

/*! \brief LC-QuAD 1.0 file: array of {"corrected_question","sparql_query",...}. \throws FormatError */
std::vector<DatasetRecord> ParseLcQuad(std::string_view json_text, Split split);

struct RecordFailure {
  std::size_t index = 0;
  std::string message;
};

struct StructureStats {
  std::array<std::size_t, 3> records{};
  std::array<std::size_t, 3> unique{};
  /*! Test structures absent from train. */
  std::size_t unseen_structures = 0;
  /*! Test questions whose structure is absent from train. */
  std::size_t unseen_questions = 0;
  /*! Serialized structure -> occurrences, per split. */
  std::array<std::map<std::string, std::size_t>, 3> structures;
  std::vector<RecordFailure> failures;

  nlohmann::json ToJson() const;
  std::string ToText() const;
};

/*! \brief Records that fail to canonicalize or decompose are reported, never fatal. */
StructureStats CorpusStats(const std::vector<DatasetRecord>& dataset, const PrefixTable& prefixes,
                           const OntologySnapshot* ontology = nullptr);

}  // namespace kgsparql

#endif  // KGSPARQL_CORPUS_H_
