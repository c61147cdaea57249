#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pathflux {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailedVerdict = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

// Entry point of the `pathflux` command. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pathflux
