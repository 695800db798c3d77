#pragma once

#include <stdexcept>
#include <string>

namespace hvgnn {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operand shapes/lengths do not match.
struct dimension_error : error {
    using error::error;
};

/// Incompatible run or model configuration (e.g. curvature mismatch).
struct configuration_error : error {
    using error::error;
};

/// A caller broke an API contract (wrong base point, non-scalar backward, ...).
struct contract_error : error {
    using error::error;
};

/// Input value outside the mathematical domain of an operation.
struct domain_error : error {
    using error::error;
};

/// Malformed input file.
struct parse_error : error {
    using error::error;
};

/// Invalid runtime input (unknown node id, missing data).
struct input_error : error {
    using error::error;
};

/// Use of a value from a stale tape generation.
struct tape_error : error {
    using error::error;
};

/// Training became numerically invalid (non-finite loss).
struct training_error : error {
    using error::error;
};

} // namespace hvgnn
