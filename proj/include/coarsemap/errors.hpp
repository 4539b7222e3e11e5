#ifndef COARSEMAP_ERRORS_HPP
#define COARSEMAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace coarsemap {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- OSM ingest ---
class MalformedXml : public Error {
public:
    using Error::Error;
};
class MissingCoordinate : public Error {
public:
    using Error::Error;
};

// --- geodesy ---
class OutOfExtent : public Error {
public:
    using Error::Error;
};
class DegenerateLatitude : public Error {
public:
    using Error::Error;
};
class EmptyTracks : public Error {
public:
    using Error::Error;
};

// --- map graph ---
class DegeneratePolyline : public Error {
public:
    using Error::Error;
};

// --- scenario ---
class SchemaViolation : public Error {
public:
    using Error::Error;
};
class NoFocalAgent : public Error {
public:
    using Error::Error;
};
class DuplicateFocal : public Error {
public:
    using Error::Error;
};
class NetworkFailure : public Error {
public:
    using Error::Error;
};
class ServerError : public Error {
public:
    ServerError(int status, const std::string& what) : Error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

// --- predictors ---
class InsufficientHistory : public Error {
public:
    using Error::Error;
};

// --- metrics ---
class LengthMismatch : public Error {
public:
    using Error::Error;
};
class EmptyResults : public Error {
public:
    using Error::Error;
};

}  // namespace coarsemap

#endif
