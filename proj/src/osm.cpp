#include "coarsemap/osm.hpp"

#include <expat.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <system_error>

#include "coarsemap/errors.hpp"

namespace coarsemap {

namespace {

std::optional<std::int64_t> parse_int64(const char* s) {
    if (s == nullptr || *s == '\0') return std::nullopt;
    std::int64_t value = 0;
    const char* end = s + std::string_view(s).size();
    auto [ptr, ec] = std::from_chars(s, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

std::optional<double> parse_double(const char* s) {
    if (s == nullptr || *s == '\0') return std::nullopt;
    if (*s == '+') ++s;  // from_chars rejects an explicit plus sign
    double value = 0;
    const char* end = s + std::string_view(s).size();
    auto [ptr, ec] = std::from_chars(s, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

const char* find_attr(const char** atts, std::string_view name) {
    for (int i = 0; atts[i] != nullptr; i += 2) {
        if (name == atts[i]) return atts[i + 1];
    }
    return nullptr;
}

// Expat drives callbacks; errors raised inside them are stashed here and
// rethrown once control returns from XML_Parse.
struct ParseState {
    XML_Parser parser = nullptr;
    WarningLog* log = nullptr;

    OsmGraph graph;
    std::set<std::int64_t> dropped_nodes;  // out-of-range coordinates

    int depth = 0;
    enum class Container { None, Node, Way, Relation, Skipped } container = Container::None;
    int container_depth = 0;
    OsmNode node;
    OsmWay way;
    OsmRelation relation;

    std::optional<std::string> pending_error;
    bool pending_is_coordinate = false;

    void warn(const char* kind, std::int64_t id, std::string reason) {
        if (log != nullptr) log->add(kind, id, std::move(reason));
    }

    std::string position() const {
        std::ostringstream os;
        os << "line " << XML_GetCurrentLineNumber(parser) << ", column "
           << XML_GetCurrentColumnNumber(parser) + 1;
        return os.str();
    }

    void fail(std::string message, bool is_coordinate) {
        pending_error = std::move(message);
        pending_is_coordinate = is_coordinate;
        XML_StopParser(parser, XML_FALSE);
    }
};

void begin_node(ParseState& st, const char** atts) {
    const auto id = parse_int64(find_attr(atts, "id"));
    if (!id) {
        st.fail("node with missing or invalid id at " + st.position(), false);
        return;
    }
    const char* lat_s = find_attr(atts, "lat");
    const char* lon_s = find_attr(atts, "lon");
    const auto lat = parse_double(lat_s);
    const auto lon = parse_double(lon_s);
    if (!lat || !lon) {
        st.fail("node " + std::to_string(*id) + " at " + st.position() +
                    (lat_s == nullptr || lon_s == nullptr ? ": missing lat/lon attribute"
                                                          : ": unparseable lat/lon attribute"),
                true);
        return;
    }
    st.node = OsmNode{*id, *lat, *lon, 0};
    st.container = ParseState::Container::Node;
}

void begin_way(ParseState& st, const char** atts) {
    const auto id = parse_int64(find_attr(atts, "id"));
    if (!id) {
        st.fail("way with missing or invalid id at " + st.position(), false);
        return;
    }
    st.way = OsmWay{*id, {}, false};
    st.container = ParseState::Container::Way;
}

void begin_relation(ParseState& st, const char** atts) {
    const auto id = parse_int64(find_attr(atts, "id"));
    if (!id) {
        st.fail("relation with missing or invalid id at " + st.position(), false);
        return;
    }
    st.relation = OsmRelation{*id, {}};
    st.container = ParseState::Container::Relation;
}

void handle_tag(ParseState& st, const char** atts) {
    const char* k = find_attr(atts, "k");
    const char* v = find_attr(atts, "v");
    if (k == nullptr || v == nullptr) return;
    if (std::string_view(k) != "highway") return;
    if (st.container == ParseState::Container::Node) {
        if (std::string_view(v) == "stop") {
            st.node.markers |= static_cast<unsigned>(Marker::StopSign);
        } else if (std::string_view(v) == "traffic_signals") {
            st.node.markers |= static_cast<unsigned>(Marker::TrafficSignal);
        }
    } else if (st.container == ParseState::Container::Way) {
        st.way.is_road = true;  // any highway class marks a road
    }
}

void handle_nd(ParseState& st, const char** atts) {
    const auto ref = parse_int64(find_attr(atts, "ref"));
    if (!ref) {
        st.fail("nd with missing or invalid ref in way " + std::to_string(st.way.id) + " at " +
                    st.position(),
                false);
        return;
    }
    st.way.node_refs.push_back(*ref);
}

void handle_member(ParseState& st, const char** atts) {
    const char* type = find_attr(atts, "type");
    const auto ref = parse_int64(find_attr(atts, "ref"));
    const char* role = find_attr(atts, "role");
    if (type == nullptr || !ref) {
        st.fail("member with missing type or ref in relation " + std::to_string(st.relation.id) +
                    " at " + st.position(),
                false);
        return;
    }
    OsmMember member;
    member.ref = *ref;
    member.role = role == nullptr ? "" : role;
    const std::string_view kind(type);
    if (kind == "node") {
        member.kind = MemberKind::Node;
    } else if (kind == "way") {
        member.kind = MemberKind::Way;
    } else if (kind == "relation") {
        member.kind = MemberKind::Relation;
    } else {
        // Unknown member kind poisons the whole relation.
        member.kind = MemberKind::Node;
        member.ref = 0;
        st.warn("relation", st.relation.id, "member with unknown kind '" + std::string(kind) +
                                                "' dropped with its relation");
        st.relation.members.clear();
        st.relation.id = 0;
        st.container = ParseState::Container::Skipped;
        return;
    }
    st.relation.members.push_back(std::move(member));
}

void XMLCALL start_element(void* user, const XML_Char* name, const XML_Char** atts) {
    auto& st = *static_cast<ParseState*>(user);
    ++st.depth;
    if (st.pending_error) return;
    const std::string_view element(name);

    if (st.depth == 2 && st.container == ParseState::Container::None) {
        if (element == "node") {
            begin_node(st, atts);
        } else if (element == "way") {
            begin_way(st, atts);
        } else if (element == "relation") {
            begin_relation(st, atts);
        }
        if (st.container != ParseState::Container::None) st.container_depth = st.depth;
        return;
    }

    if (st.container != ParseState::Container::None && st.depth == st.container_depth + 1) {
        if (element == "tag") {
            handle_tag(st, atts);
        } else if (element == "nd" && st.container == ParseState::Container::Way) {
            handle_nd(st, atts);
        } else if (element == "member" && st.container == ParseState::Container::Relation) {
            handle_member(st, atts);
        }
    }
}

void finish_node(ParseState& st) {
    const OsmNode& n = st.node;
    if (n.lat < -90.0 || n.lat > 90.0 || n.lon < -180.0 || n.lon > 180.0) {
        st.warn("node", n.id, "coordinates out of WGS84 range, node dropped");
        st.dropped_nodes.insert(n.id);
        return;
    }
    if (!st.graph.nodes.emplace(n.id, n).second) {
        st.warn("node", n.id, "duplicate id, keeping the first occurrence");
    }
}

void finish_way(ParseState& st) {
    const std::int64_t id = st.way.id;
    if (!st.graph.ways.emplace(id, std::move(st.way)).second) {
        st.warn("way", id, "duplicate id, keeping the first occurrence");
    }
}

void finish_relation(ParseState& st) {
    const std::int64_t id = st.relation.id;
    if (!st.graph.relations.emplace(id, std::move(st.relation)).second) {
        st.warn("relation", id, "duplicate id, keeping the first occurrence");
    }
}

void XMLCALL end_element(void* user, const XML_Char*) {
    auto& st = *static_cast<ParseState*>(user);
    if (!st.pending_error && st.container != ParseState::Container::None &&
        st.depth == st.container_depth) {
        switch (st.container) {
            case ParseState::Container::Node:
                finish_node(st);
                break;
            case ParseState::Container::Way:
                finish_way(st);
                break;
            case ParseState::Container::Relation:
                finish_relation(st);
                break;
            default:
                break;
        }
        st.container = ParseState::Container::None;
    }
    --st.depth;
}

// Drop ways whose refs do not resolve, then iterate relation drops to a
// fixpoint (relations may reference other relations).
void enforce_referential_integrity(ParseState& st) {
    OsmGraph& g = st.graph;

    for (auto it = g.ways.begin(); it != g.ways.end();) {
        const OsmWay& way = it->second;
        bool resolved = way.node_refs.size() >= 2;
        std::string reason = resolved ? "" : "fewer than 2 node refs";
        if (resolved) {
            for (std::int64_t ref : way.node_refs) {
                if (!g.nodes.contains(ref)) {
                    resolved = false;
                    reason = "unresolved node ref " + std::to_string(ref);
                    break;
                }
            }
        }
        if (!resolved) {
            st.warn("way", way.id, reason + ", way dropped");
            it = g.ways.erase(it);
        } else {
            ++it;
        }
    }

    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = g.relations.begin(); it != g.relations.end();) {
            const OsmRelation& rel = it->second;
            std::string reason;
            for (const OsmMember& m : rel.members) {
                const bool ok = m.kind == MemberKind::Node     ? g.nodes.contains(m.ref)
                                : m.kind == MemberKind::Way    ? g.ways.contains(m.ref)
                                : g.relations.contains(m.ref);
                if (!ok) {
                    reason = "unresolved member " + std::to_string(m.ref);
                    break;
                }
            }
            if (!reason.empty()) {
                st.warn("relation", rel.id, reason + ", relation dropped");
                it = g.relations.erase(it);
                changed = true;
            } else {
                ++it;
            }
        }
    }
}

void append_escaped(std::string& out, std::string_view text) {
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
}

void append_double(std::string& out, double value) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, value);  // shortest round-trip form
    out.append(buf, r.ptr);
}

}  // namespace

OsmGraph parse_osm_xml(std::string_view document, WarningLog* log) {
    XML_Parser parser = XML_ParserCreate(nullptr);
    if (parser == nullptr) throw Error("failed to allocate XML parser");

    ParseState st;
    st.parser = parser;
    st.log = log;
    XML_SetUserData(parser, &st);
    XML_SetElementHandler(parser, start_element, end_element);

    const XML_Status status =
        XML_Parse(parser, document.data(), static_cast<int>(document.size()), XML_TRUE);

    if (st.pending_error) {
        std::string message = *st.pending_error;
        XML_ParserFree(parser);
        if (st.pending_is_coordinate) throw MissingCoordinate(message);
        throw MalformedXml(message);
    }
    if (status != XML_STATUS_OK) {
        std::ostringstream os;
        os << "malformed XML at line " << XML_GetCurrentLineNumber(parser) << ", column "
           << XML_GetCurrentColumnNumber(parser) + 1 << ": "
           << XML_ErrorString(XML_GetErrorCode(parser));
        XML_ParserFree(parser);
        throw MalformedXml(os.str());
    }
    XML_ParserFree(parser);

    enforce_referential_integrity(st);
    return std::move(st.graph);
}

OsmGraph parse_osm_file(const std::string& path, WarningLog* log) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open OSM file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_osm_xml(buffer.str(), log);
}

std::string serialize_osm_xml(const OsmGraph& graph) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<osm version=\"0.6\" generator=\"coarsemap\">\n";
    for (const auto& [id, node] : graph.nodes) {
        out += "  <node id=\"" + std::to_string(id) + "\" lat=\"";
        append_double(out, node.lat);
        out += "\" lon=\"";
        append_double(out, node.lon);
        out += "\"";
        if (node.has_marker()) {
            out += ">\n";
            if (node.has(Marker::StopSign))
                out += "    <tag k=\"highway\" v=\"stop\"/>\n";
            if (node.has(Marker::TrafficSignal))
                out += "    <tag k=\"highway\" v=\"traffic_signals\"/>\n";
            out += "  </node>\n";
        } else {
            out += "/>\n";
        }
    }
    for (const auto& [id, way] : graph.ways) {
        out += "  <way id=\"" + std::to_string(id) + "\">\n";
        for (std::int64_t ref : way.node_refs) {
            out += "    <nd ref=\"" + std::to_string(ref) + "\"/>\n";
        }
        if (way.is_road) out += "    <tag k=\"highway\" v=\"road\"/>\n";
        out += "  </way>\n";
    }
    for (const auto& [id, rel] : graph.relations) {
        out += "  <relation id=\"" + std::to_string(id) + "\">\n";
        for (const OsmMember& m : rel.members) {
            const char* kind = m.kind == MemberKind::Node  ? "node"
                               : m.kind == MemberKind::Way ? "way"
                                                           : "relation";
            out += "    <member type=\"";
            out += kind;
            out += "\" ref=\"" + std::to_string(m.ref) + "\" role=\"";
            append_escaped(out, m.role);
            out += "\"/>\n";
        }
        out += "  </relation>\n";
    }
    out += "</osm>\n";
    return out;
}

OsmGraph filter_roads(const OsmGraph& graph) {
    OsmGraph result;
    for (const auto& [id, way] : graph.ways) {
        if (!way.is_road) continue;
        result.ways.emplace(id, way);
        for (std::int64_t ref : way.node_refs) {
            auto it = graph.nodes.find(ref);
            if (it != graph.nodes.end()) result.nodes.insert(*it);
        }
    }
    for (const auto& [id, node] : graph.nodes) {
        if (node.has_marker()) result.nodes.insert({id, node});
    }
    return result;
}

}  // namespace coarsemap
