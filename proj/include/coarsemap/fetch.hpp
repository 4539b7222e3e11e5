#ifndef COARSEMAP_FETCH_HPP
#define COARSEMAP_FETCH_HPP

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "coarsemap/diagnostics.hpp"
#include "coarsemap/geodesy.hpp"
#include "coarsemap/osm.hpp"

namespace coarsemap {

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Minimal HTTP abstraction so network access can be faked in tests.
/// Implementations throw NetworkFailure when no response was obtained
/// (DNS failure, refused connection, timeout); any status code counts
/// as a response.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse get(const std::string& url) = 0;
};

/// Real transport backed by cpp-httplib (HTTPS when built with OpenSSL).
std::unique_ptr<HttpTransport> make_default_transport();

struct FetchOptions {
    int max_retries = 3;             // extra attempts after the first
    double initial_backoff_s = 1.0;  // doubles after every failure
    // Injectable so tests do not actually wait; defaults to a real sleep.
    std::function<void(double)> sleep;
    // Injectable transport; the default httplib one is used when null.
    HttpTransport* transport = nullptr;
};

/// Geographic bounding box as (south-west, north-east) corners.
using GeoBBox = std::pair<GeoPoint, GeoPoint>;

/// Overpass interpreter URL requesting every element in the box (with
/// referenced nodes pulled in), coordinates canonicalized to 1e-6 deg.
std::string overpass_query_url(const std::string& endpoint, const GeoBBox& bbox);

/// Cache key for (endpoint, bbox): 16 hex digits. Boxes that agree
/// after rounding to 1e-6 degrees map to the same key.
std::string bbox_cache_key(const std::string& endpoint, const GeoBBox& bbox);

/// Raw OSM XML for the box. Served from `cache_dir` when present;
/// otherwise downloaded, validated, and cached atomically. Network
/// failures are retried with exponential backoff; non-2xx responses
/// throw ServerError without retry. Parse errors propagate and leave
/// the cache untouched.
std::string fetch_map_xml(const GeoBBox& bbox, const std::string& endpoint,
                          const std::filesystem::path& cache_dir,
                          const FetchOptions& options = {}, WarningLog* log = nullptr);

/// Parsed variant of fetch_map_xml.
OsmGraph fetch_map(const GeoBBox& bbox, const std::string& endpoint,
                   const std::filesystem::path& cache_dir, const FetchOptions& options = {},
                   WarningLog* log = nullptr);

}  // namespace coarsemap

#endif
