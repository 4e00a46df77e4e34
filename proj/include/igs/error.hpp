#pragma once

#include <stdexcept>
#include <string>

namespace igs {

enum class ErrorKind {
    invalid_parameter,   // non-finite or out-of-contract numeric input
    dimension_mismatch,  // image/buffer shapes disagree
    bad_magic,           // not an IGS2 file
    bad_version,         // unsupported format version
    truncated,           // file shorter than the header promises
    empty_set,           // zero Gaussians where at least one is required
    io,                  // filesystem / PNG failures
    unsupported_format,  // non-PNG raster input
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace igs
