#pragma once

#include <stdexcept>
#include <string>

namespace acbo {

// Error taxonomy. The CLI maps these onto exit codes:
//   ConfigError -> 2, OracleError -> 3, DataError -> 4, everything else -> 1.

// Malformed arguments, out-of-range indices, mismatched variable sets.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A request exceeding a hard resource cap (e.g. exhaustive DAG enumeration
// above the configured depth cap). Callers should switch to sampled mode.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration values (eta >= 0.5, even vote counts, bad stop rule).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unreadable/malformed data files, text that violates the premise grammar.
struct DataError : std::runtime_error {
    std::size_t position = 0;  // 1-based sentence or line index when known
    explicit DataError(const std::string& what, std::size_t pos = 0)
        : std::runtime_error(what), position(pos) {}
};

// Oracle transport failure after retries, or a replay transcript that does
// not contain the requested query.
struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A premise with no consistent DAG: entailment labels are undefined.
struct UnsatisfiablePremise : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal structural violation (a cycle where a DAG was required).
struct StructuralError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace acbo
