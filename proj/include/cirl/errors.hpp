#pragma once

#include <stdexcept>
#include <string>

namespace cirl {

/// Integration produced a non-finite state.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// API used out of sequence (stepping a finished episode, missing history).
struct ProtocolError : std::logic_error {
    explicit ProtocolError(const std::string& what) : std::logic_error(what) {}
};

/// Matrix has no inverse.
struct SingularMatrixError : std::runtime_error {
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Plant failed to settle within the allotted horizon.
struct NonConvergenceError : std::runtime_error {
    explicit NonConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file or schema mismatch.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cirl
