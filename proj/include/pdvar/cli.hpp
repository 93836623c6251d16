#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pdvar {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Runs one `pdvar` subcommand. `args` excludes the program name. Data goes to
// `out` (or to --out files), diagnostics to `err`.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pdvar
