#pragma once

#include <stdexcept>
#include <string>

namespace qzeno {

/// Numeric breakdown during a run: null-record probability underflow,
/// perturbative normalization loss, vanishing conditional norm. Kept
/// distinct from argument validation so the CLI can map it to exit code 3.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration (bad key, bad value, inconsistent protocol spec).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failed file read/write.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qzeno
