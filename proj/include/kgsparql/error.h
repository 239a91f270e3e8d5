/*!
 *  Copyright (c) 2024 by Contributors
 * \file kgsparql/error.h
 * \brief Exception hierarchy shared by all kgsparql modules.
 */
#ifndef KGSPARQL_ERROR_H_
#define KGSPARQL_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgsparql {

/*! \brief Base class of every error raised by the library. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*! \brief Malformed input text. `position` is a byte offset into the input. */
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, std::vector<std::string> expected, const std::string& detail);

  std::size_t position() const { return position_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

/*! \brief Valid SPARQL outside the supported subset (UNION, OPTIONAL, property paths, ...). */
class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(std::string construct);

  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

/*! \brief Malformed JSON or structurally invalid configuration file. */
class FormatError : public Error {
 public:
  using Error::Error;
};

/*! \brief File could not be opened or read. */
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgsparql

#endif  // KGSPARQL_ERROR_H_
