#ifndef RISKTRACE_ERRORS_HPP
#define RISKTRACE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace risktrace {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameter or argument outside its mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Path or trajectory samples out of time order.
class OrderingError : public Error {
public:
    using Error::Error;
};

/// Input not representable on (or not aligned to) the target grid.
class DiscretizationError : public Error {
public:
    using Error::Error;
};

/// Classifier evaluation asked for with single-class labels.
class DegenerateLabelsError : public Error {
public:
    using Error::Error;
};

/// Observation set assigns zero posterior mass everywhere reachable.
class InconsistentObservationError : public Error {
public:
    using Error::Error;
};

/// Socket-level failure (connect, send, recv).
class TransportError : public Error {
public:
    using Error::Error;
};

/// Malformed or unexpected wire message, or an error status from the server.
class ProtocolError : public Error {
public:
    using Error::Error;
};

enum class TileErrorKind {
    bad_magic,
    unsupported_version,
    truncated,
    unsorted_entries,
    trailing_bytes,
};

class TileDecodeError : public Error {
public:
    TileDecodeError(TileErrorKind kind, const std::string& msg)
        : Error(msg), kind_(kind) {}
    TileErrorKind kind() const { return kind_; }

private:
    TileErrorKind kind_;
};

} // namespace risktrace

#endif
