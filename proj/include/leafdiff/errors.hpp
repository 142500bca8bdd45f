#pragma once

#include <stdexcept>
#include <string>

namespace leafdiff {

// Exit-code taxonomy: 0 pass, 2 audit failure, 3 precondition violation,
// 4 numerical starvation.
struct AuditError : std::runtime_error {
    explicit AuditError(const std::string& msg) : std::runtime_error(msg) {}
    static constexpr int exit_code = 2;
};

struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
    static constexpr int exit_code = 3;
};

// Reduction escaped the word budget: the step was too large for the reducer.
struct BudgetExceeded : PreconditionError {
    explicit BudgetExceeded(const std::string& msg) : PreconditionError(msg) {}
};

struct StarvationError : std::runtime_error {
    explicit StarvationError(const std::string& msg) : std::runtime_error(msg) {}
    static constexpr int exit_code = 4;
};

} // namespace leafdiff
