#include "coarsemap/fetch.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#ifdef COARSEMAP_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "coarsemap/errors.hpp"

namespace coarsemap {

namespace {

// --- default transport -------------------------------------------------

class HttplibTransport final : public HttpTransport {
public:
    HttpResponse get(const std::string& url) override {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos)
            throw NetworkFailure("malformed URL (no scheme): " + url);
        const auto path_start = url.find('/', scheme_end + 3);
        const std::string base =
            path_start == std::string::npos ? url : url.substr(0, path_start);
        const std::string path =
            path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(base);
        client.set_connection_timeout(30, 0);
        client.set_read_timeout(120, 0);
        client.set_follow_location(true);
        httplib::Result res = client.Get(path);
        if (!res) throw NetworkFailure("request to " + base + " failed: " + to_string(res.error()));
        return HttpResponse{res->status, res->body};
    }
};

// --- cache key / query url ---------------------------------------------

std::int64_t micro_degrees(double v) { return std::llround(v * 1e6); }

std::string canonical_bbox(const GeoBBox& bbox) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f",
                  static_cast<double>(micro_degrees(bbox.first.lat)) / 1e6,
                  static_cast<double>(micro_degrees(bbox.first.lon)) / 1e6,
                  static_cast<double>(micro_degrees(bbox.second.lat)) / 1e6,
                  static_cast<double>(micro_degrees(bbox.second.lon)) / 1e6);
    return buf;
}

std::string percent_encode(std::string_view text) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(text.size() * 3);
    for (const char c : text) {
        const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                                (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' ||
                                c == '~';
        if (unreserved) {
            out.push_back(c);
        } else {
            const auto byte = static_cast<unsigned char>(c);
            out.push_back('%');
            out.push_back(kHex[byte >> 4]);
            out.push_back(kHex[byte & 0xf]);
        }
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open cache file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& payload) {
    static std::atomic<std::uint64_t> counter{0};
    const auto tag = counter.fetch_add(1) ^ static_cast<std::uint64_t>(
        std::chrono::steady_clock::now().time_since_epoch().count());
    std::filesystem::path tmp = path;
    tmp += ".tmp-" + std::to_string(tag);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open cache file for writing: " + tmp.string());
        out << payload;
        out.flush();
        if (!out) throw Error("failed writing cache file: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);  // atomic publish
}

std::string fetch_payload(const GeoBBox& bbox, const std::string& endpoint,
                          const FetchOptions& options, WarningLog* log) {
    const std::string url = overpass_query_url(endpoint, bbox);

    std::unique_ptr<HttpTransport> owned;
    HttpTransport* transport = options.transport;
    if (transport == nullptr) {
        owned = make_default_transport();
        transport = owned.get();
    }
    const auto sleep = options.sleep
                           ? options.sleep
                           : [](double seconds) {
                                 std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
                             };

    double backoff = options.initial_backoff_s;
    for (int attempt = 0;; ++attempt) {
        try {
            HttpResponse response = transport->get(url);
            if (response.status < 200 || response.status >= 300) {
                std::string excerpt = response.body.substr(0, 200);
                throw ServerError(response.status,
                                  "server returned status " + std::to_string(response.status) +
                                      (excerpt.empty() ? "" : ": " + excerpt));
            }
            return std::move(response.body);
        } catch (const NetworkFailure& failure) {
            if (attempt >= options.max_retries) throw;
            if (log)
                log->add("fetch", 0,
                         std::string("retrying after network failure: ") + failure.what());
            sleep(backoff);
            backoff *= 2.0;
        }
    }
}

}  // namespace

std::unique_ptr<HttpTransport> make_default_transport() {
    return std::make_unique<HttplibTransport>();
}

std::string overpass_query_url(const std::string& endpoint, const GeoBBox& bbox) {
    const std::string box = canonical_bbox(bbox);
    const std::string query = "[out:xml][timeout:60];(node(" + box + ");way(" + box +
                              ");relation(" + box + "););(._;>;);out body;";
    return endpoint + "?data=" + percent_encode(query);
}

std::string bbox_cache_key(const std::string& endpoint, const GeoBBox& bbox) {
    const std::string canonical = endpoint + "|" + canonical_bbox(bbox);
    // FNV-1a, 64-bit.
    std::uint64_t hash = 1469598103934665603ull;
    for (const char c : canonical) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string fetch_map_xml(const GeoBBox& bbox, const std::string& endpoint,
                          const std::filesystem::path& cache_dir, const FetchOptions& options,
                          WarningLog* log) {
    std::filesystem::create_directories(cache_dir);
    const std::filesystem::path cached =
        cache_dir / (bbox_cache_key(endpoint, bbox) + ".osm");
    if (std::filesystem::exists(cached)) return read_file(cached);

    std::string payload = fetch_payload(bbox, endpoint, options, log);
    parse_osm_xml(payload);  // validate before it can poison the cache
    write_file_atomic(cached, payload);
    return payload;
}

OsmGraph fetch_map(const GeoBBox& bbox, const std::string& endpoint,
                   const std::filesystem::path& cache_dir, const FetchOptions& options,
                   WarningLog* log) {
    return parse_osm_xml(fetch_map_xml(bbox, endpoint, cache_dir, options, log), log);
}

}  // namespace coarsemap
