#ifndef COARSEMAP_OSM_HPP
#define COARSEMAP_OSM_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "coarsemap/diagnostics.hpp"

namespace coarsemap {

/// Intersection markers retained from node tags. Everything else in the
/// tag ontology is deliberately dropped during parsing.
enum class Marker : unsigned {
    StopSign = 1u << 0,       // highway=stop
    TrafficSignal = 1u << 1,  // highway=traffic_signals
};

struct OsmNode {
    std::int64_t id = 0;
    double lat = 0.0;  // degrees WGS84, [-90, 90]
    double lon = 0.0;  // degrees WGS84, [-180, 180]
    unsigned markers = 0;

    bool has(Marker m) const { return (markers & static_cast<unsigned>(m)) != 0; }
    bool has_marker() const { return markers != 0; }

    bool operator==(const OsmNode&) const = default;
};

struct OsmWay {
    std::int64_t id = 0;
    std::vector<std::int64_t> node_refs;  // ordered, length >= 2 after resolution
    bool is_road = false;                 // carries a highway-class tag

    bool operator==(const OsmWay&) const = default;
};

enum class MemberKind { Node, Way, Relation };

struct OsmMember {
    MemberKind kind = MemberKind::Node;
    std::int64_t ref = 0;
    std::string role;

    bool operator==(const OsmMember&) const = default;
};

struct OsmRelation {
    std::int64_t id = 0;
    std::vector<OsmMember> members;

    bool operator==(const OsmRelation&) const = default;
};

/// In-memory OSM graph with referential integrity: every way node ref
/// and every relation member resolves within the graph. Elements that
/// do not resolve are dropped at parse time with a recorded warning.
struct OsmGraph {
    std::map<std::int64_t, OsmNode> nodes;
    std::map<std::int64_t, OsmWay> ways;
    std::map<std::int64_t, OsmRelation> relations;

    bool operator==(const OsmGraph&) const = default;
};

/// Parse an OSM XML v0.6 document. Retains only the highway road flag on
/// ways and the stop-sign / traffic-signal markers on nodes; all other
/// tags are discarded. Throws MalformedXml (with line/column) on
/// unparseable input and MissingCoordinate when a node lacks a usable
/// lat/lon. Dropped elements are recorded in `log` when given.
OsmGraph parse_osm_xml(std::string_view document, WarningLog* log = nullptr);

/// Parse an .osm file from disk. Same contract as parse_osm_xml.
OsmGraph parse_osm_file(const std::string& path, WarningLog* log = nullptr);

/// Serialize back to the same OSM XML dialect. Re-parsing the output
/// yields a field-by-field identical graph.
std::string serialize_osm_xml(const OsmGraph& graph);

/// Restrict to drivable ways: keeps ways with is_road, the nodes they
/// reference, and every marker node; relations are dropped.
OsmGraph filter_roads(const OsmGraph& graph);

}  // namespace coarsemap

#endif
