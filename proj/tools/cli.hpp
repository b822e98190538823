#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lavlev::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kParseFailure = 2;
inline constexpr int kNumericalFailure = 3;
inline constexpr int kReproductionMismatch = 4;
inline constexpr int kInternalFailure = 5;

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lavlev::cli
