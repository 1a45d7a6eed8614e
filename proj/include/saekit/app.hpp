#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace saekit {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidInput = 2;

// Entry point of the saekit command line; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 2 for errors caused by the inputs, 1 for everything else.
int exit_code_for(const std::exception& e) noexcept;

}  // namespace saekit
