#pragma once

#include <iosfwd>
#include <string>

#include "srw/fragment.hpp"

namespace srw {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitDomainError = 1,
  kExitUsage = 2,
  kExitConflict = 3,
};

/// A fragment file, or a glue manifest (recognised by its "fragments" key)
/// whose fragments are glued in order.
Fragment load_network_source(const std::string& path);

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace srw
