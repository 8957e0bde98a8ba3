#pragma once

#include <stdexcept>
#include <string>

namespace graphpb {

// Common base so callers can catch everything from this library at once.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- annotation / corpus ---

struct EncodingError : Error {
    using Error::Error;
};

struct InvalidMarkerScheme : Error {
    using Error::Error;
};

// A marker token in the wrong place (leading, adjacent) or an unrecognized
// marker-like token. EmptySegment is the adjacent-marker case: two markers
// with nothing between them would create a zero-length prosodic word.
struct MalformedMarker : Error {
    using Error::Error;
};

struct EmptySegment : MalformedMarker {
    using MalformedMarker::MalformedMarker;
};

struct IoError : Error {
    using Error::Error;
};

struct RecordFormatError : Error {
    using Error::Error;
};

struct PhonemeCountMismatch : Error {
    using Error::Error;
};

// --- graph construction ---

struct EmptyTree : Error {
    using Error::Error;
};

struct NoPhonemes : Error {
    using Error::Error;
};

struct GraphFormatError : Error {
    using Error::Error;
};

struct NotAChain : Error {
    using Error::Error;
};

struct SpanCoverageError : Error {
    using Error::Error;
};

// --- numerics ---

struct ShapeMismatch : Error {
    using Error::Error;
};

struct NotScalarLoss : Error {
    using Error::Error;
};

struct DetachedTensor : Error {
    using Error::Error;
};

// Bad EncoderConfig / EdgeConfig / TrainConfig values.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace graphpb
