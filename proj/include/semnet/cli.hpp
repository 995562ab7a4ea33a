// Command-line front end. Subcommands: simulate, fit, gibbs-check, roc,
// split-repro. Pure function of (argv, input files, seed): same invocation,
// same bytes out.
#ifndef SEMNET_CLI_HPP
#define SEMNET_CLI_HPP

#include <ostream>

namespace semnet {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace semnet

#endif
