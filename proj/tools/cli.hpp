#pragma once

#include <string>
#include <vector>

namespace levygibbs::cli {

// Exit codes.
enum : int {
    kOk = 0,
    kFailure = 1, // a verdict failed, or an unexpected error
    kConfig = 2,
    kBudget = 3,
    kCutoff = 4,
    kInstability = 5,
    kAudit = 6,
};

int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args); // args[0] is the program name

} // namespace levygibbs::cli
