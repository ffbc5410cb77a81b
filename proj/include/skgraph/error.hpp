#pragma once

#include <stdexcept>
#include <string>

namespace skg {

/// Base class for all errors raised by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A value violated a documented domain precondition (e.g. histogram not
/// normalized, empty boundary, coordinate out of range).
struct domain_error : error {
    using error::error;
};

/// Two objects built under incompatible configurations were combined
/// (signature length mismatch, wrong bin count, ...).
struct config_error : error {
    using error::error;
};

/// Malformed or undecodable input bytes (images, manifests, palettes).
struct format_error : error {
    using error::error;
};

/// Operation invoked on an object in the wrong state (e.g. querying an
/// empty graph).
struct state_error : error {
    using error::error;
};

/// Inconsistent or unusable user data (unknown label, duplicate oid, ...).
struct data_error : error {
    using error::error;
};

/// Persistent index file is corrupt or carries an unsupported version.
struct index_format_error : error {
    using error::error;
};

}  // namespace skg
