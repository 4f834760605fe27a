// Line-delimited flow exchange format:
//   {"app": str, "flow_id": str, "start"?: num,
//    "packets": [{"ts": num, "dir": 0|1, "len": int, "src_port": int, "dst_port": int,
//                 "iat"?: num, "win"?: int, "payload"?: hex}]}
// Unknown keys are ignored.

#include "skewmorph/errors.hpp"
#include "skewmorph/trace_model.hpp"

#include "../hex.hpp"

#include <json.hpp>

#include <cmath>
#include <unordered_set>

namespace skewmorph {
namespace {

using Json = nlohmann::ordered_json;

const Json& required(const Json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(where + ": missing required key '" + key + "'");
    }
    return *it;
}

double number_field(const Json& v, const char* key, const std::string& where) {
    if (!v.is_number()) {
        throw ParseError(where + ": key '" + key + "' must be a number");
    }
    double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw SchemaError(where + ": key '" + key + "' must be finite");
    }
    return d;
}

std::int64_t integer_field(const Json& v, const char* key, const std::string& where) {
    if (v.is_number_integer()) {
        return v.get<std::int64_t>();
    }
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d)) {
            return static_cast<std::int64_t>(d);
        }
    }
    throw ParseError(where + ": key '" + key + "' must be an integer");
}

std::int64_t optional_integer(const Json& obj, const char* key, std::int64_t fallback,
                              const std::string& where) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : integer_field(*it, key, where);
}

Packet parse_packet(const Json& obj, std::size_t index, const std::string& flow_where) {
    const std::string where = flow_where + " packet " + std::to_string(index);
    if (!obj.is_object()) {
        throw ParseError(where + ": packet must be an object");
    }
    Packet p;
    p.seq = static_cast<std::uint32_t>(index);
    p.timestamp = number_field(required(obj, "ts", where), "ts", where);

    const std::int64_t dir = integer_field(required(obj, "dir", where), "dir", where);
    if (dir != 0 && dir != 1) {
        throw SchemaError(where + ": key 'dir' is " + std::to_string(dir) + ", expected 0 or 1");
    }
    p.direction = static_cast<Direction>(dir);

    const std::int64_t len = integer_field(required(obj, "len", where), "len", where);
    if (len < 0) {
        throw SchemaError(where + ": key 'len' must be non-negative");
    }

    const std::int64_t sp = optional_integer(obj, "src_port", 0, where);
    const std::int64_t dp = optional_integer(obj, "dst_port", 0, where);
    if (sp < 0 || sp > 65535 || dp < 0 || dp > 65535) {
        throw SchemaError(where + ": port out of range");
    }
    p.src_port = static_cast<std::uint16_t>(sp);
    p.dst_port = static_cast<std::uint16_t>(dp);

    const std::int64_t win = optional_integer(obj, "win", 0, where);
    if (win < 0) {
        throw SchemaError(where + ": key 'win' must be non-negative");
    }
    p.tcp_win_size = static_cast<std::uint32_t>(win);

    if (auto it = obj.find("payload"); it != obj.end()) {
        if (!it->is_string()) {
            throw ParseError(where + ": key 'payload' must be a hex string");
        }
        auto bytes = detail::from_hex(it->get_ref<const std::string&>());
        if (!bytes) {
            throw ParseError(where + ": key 'payload' is not valid hex");
        }
        if (bytes->size() != static_cast<std::size_t>(len)) {
            throw SchemaError(where + ": payload holds " + std::to_string(bytes->size()) +
                              " bytes but len is " + std::to_string(len));
        }
        p.payload = std::move(*bytes);
    } else {
        p.payload.resize(static_cast<std::size_t>(len));  // filled once flow_id is known
    }
    if (auto it = obj.find("iat"); it != obj.end()) {
        p.iat = number_field(*it, "iat", where);
    } else {
        p.iat = -1.0;  // derived from timestamps below
    }
    return p;
}

Flow parse_flow_object(const Json& obj, const std::string& where) {
    if (!obj.is_object()) {
        throw ParseError(where + ": flow must be an object");
    }
    const Json& app = required(obj, "app", where);
    const Json& id = required(obj, "flow_id", where);
    const Json& packets = required(obj, "packets", where);
    if (!app.is_string()) throw ParseError(where + ": key 'app' must be a string");
    if (!id.is_string()) throw ParseError(where + ": key 'flow_id' must be a string");
    if (!packets.is_array()) throw ParseError(where + ": key 'packets' must be an array");

    Flow flow;
    flow.app_label = app.get<std::string>();
    flow.flow_id = id.get<std::string>();
    if (auto it = obj.find("start"); it != obj.end()) {
        flow.start_time = number_field(*it, "start", where);
    }
    if (packets.empty()) {
        throw SchemaError(where + ": flow '" + flow.flow_id + "' has no packets");
    }

    std::vector<bool> explicit_payload;
    flow.packets.reserve(packets.size());
    for (std::size_t i = 0; i < packets.size(); ++i) {
        explicit_payload.push_back(packets[i].is_object() && packets[i].contains("payload"));
        flow.packets.push_back(parse_packet(packets[i], i, where));
    }

    // Timestamps are stored relative to the first packet.
    const double first = flow.packets.front().timestamp;
    if (first != 0.0) {
        flow.start_time = flow.start_time.value_or(0.0) + first;
        for (Packet& p : flow.packets) {
            p.timestamp -= first;
        }
    }
    for (std::size_t i = 0; i < flow.packets.size(); ++i) {
        Packet& p = flow.packets[i];
        if (p.iat < 0.0) {
            p.iat = i == 0 ? 0.0 : p.timestamp - flow.packets[i - 1].timestamp;
        }
        if (!explicit_payload[i]) {
            p.payload = synthetic_payload(flow.flow_id, p.seq, p.payload.size());
        }
    }
    try {
        validate_flow(flow);
    } catch (const SchemaError& e) {
        throw SchemaError(where + ": " + e.what());
    }
    return flow;
}

}  // namespace

std::vector<Flow> parse_flow_lines(std::string_view document) {
    std::vector<Flow> flows;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= document.size()) {
        std::size_t end = document.find('\n', pos);
        if (end == std::string_view::npos) end = document.size();
        std::string_view line = document.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }
        const std::string where = "line " + std::to_string(line_no);
        Json obj;
        try {
            obj = Json::parse(line.begin(), line.end());
        } catch (const Json::parse_error& e) {
            throw ParseError(where + ": " + e.what());
        }
        Flow flow = parse_flow_object(obj, where);
        if (!seen.insert(flow.flow_id).second) {
            throw SchemaError(where + ": duplicate flow_id '" + flow.flow_id + "'");
        }
        flows.push_back(std::move(flow));
    }
    return flows;
}

std::string format_flow_line(const Flow& flow, const FlowLineOptions& options) {
    Json obj;
    obj["app"] = flow.app_label;
    obj["flow_id"] = flow.flow_id;
    if (flow.start_time) {
        obj["start"] = *flow.start_time;
    }
    Json packets = Json::array();
    for (const Packet& p : flow.packets) {
        Json pj;
        pj["ts"] = p.timestamp;
        pj["dir"] = static_cast<int>(p.direction);
        pj["len"] = p.payload_len();
        pj["src_port"] = p.src_port;
        pj["dst_port"] = p.dst_port;
        pj["iat"] = p.iat;
        if (p.tcp_win_size != 0) {
            pj["win"] = p.tcp_win_size;
        }
        if (!options.payload_only_if_custom ||
            p.payload != synthetic_payload(flow.flow_id, p.seq, p.payload.size())) {
            pj["payload"] = detail::to_hex(p.payload);
        }
        packets.push_back(std::move(pj));
    }
    obj["packets"] = std::move(packets);
    return obj.dump();
}

std::string format_flow_lines(std::span<const Flow> flows, const FlowLineOptions& options) {
    std::string out;
    for (const Flow& f : flows) {
        out += format_flow_line(f, options);
        out += '\n';
    }
    return out;
}

}  // namespace skewmorph
