#pragma once

#include <stdexcept>
#include <string>

namespace jsd {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// I/O failure (missing file, short read, malformed raster header).
struct IoError : Error {
    using Error::Error;
};

// Stream uses a feature outside baseline sequential JPEG
// (progressive/arithmetic/12-bit/unknown marker where one is required).
struct UnsupportedMarkerError : Error {
    using Error::Error;
};

struct TruncatedStreamError : Error {
    using Error::Error;
};

struct CorruptHuffmanError : Error {
    using Error::Error;
};

struct InvalidQfError : Error {
    using Error::Error;
};

struct GeometryMismatchError : Error {
    using Error::Error;
};

struct NonOddK0Error : Error {
    using Error::Error;
};

struct CoverageHoleError : Error {
    using Error::Error;
};

struct NonFiniteError : Error {
    using Error::Error;
};

struct NonInvertibleConfigError : Error {
    using Error::Error;
};

}  // namespace jsd
