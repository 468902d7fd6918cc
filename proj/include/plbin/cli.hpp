#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace plbin {

// Exit codes of the plbin tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitComputation = 3;
inline constexpr int kExitIo = 4;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace plbin
