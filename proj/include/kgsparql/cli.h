/*!
 *  Copyright (c) 2024 by Contributors
 * \file kgsparql/cli.h
 * \brief Command-line front end over the library operations.
 */
#ifndef KGSPARQL_CLI_H_
#define KGSPARQL_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace kgsparql {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitParse = 2, kExitConstraint = 3, kExitIo = 4 };

/*! \brief `args` excludes the program name. Query text defaults to `in` when not given. */
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in);

}  // namespace kgsparql

#endif  // KGSPARQL_CLI_H_
