#pragma once

#include <stdexcept>
#include <string>

namespace mcl {

// Contract violations: bad configs, malformed inputs, out-of-range labels.
// The CLI maps these to exit code 2.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when training hits a non-finite loss. Carries a JSON snapshot of
// the offending batch and config so the run can be diagnosed offline.
// The CLI maps this to exit code 3.
struct NumericalAbort : std::runtime_error {
    std::string snapshot_json;
    NumericalAbort(const std::string& msg, std::string snapshot)
        : std::runtime_error(msg), snapshot_json(std::move(snapshot)) {}
};

}  // namespace mcl
