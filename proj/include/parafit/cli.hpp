///
/// \file cli.hpp
///
/// Command-line front end: generate, fit, compress, eval, bode.
///
#ifndef PARAFIT_CLI_HPP
#define PARAFIT_CLI_HPP

#include <iosfwd>
#include <vector>
#include <string>

namespace parafit
{

/// Process exit codes.
enum ExitCode : int
{
    kExitOk = 0,
    kExitUsage = 2,
    kExitNotConverged = 3,
    kExitNumerical = 4,
};

/// Runs one CLI invocation; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace parafit

#endif /* PARAFIT_CLI_HPP */
