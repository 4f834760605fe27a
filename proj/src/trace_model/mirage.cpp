// MIRAGE-2019 biflow documents.
//
// Each top-level entry is one biflow. Per-packet arrays live under
// "packet_data" (or directly on the entry in flattened exports) and the
// label under "flow_metadata"."BF_label".

#include "skewmorph/errors.hpp"
#include "skewmorph/trace_model.hpp"

#include "../hex.hpp"

#include <json.hpp>

#include <cmath>

namespace skewmorph {
namespace {

using Json = nlohmann::ordered_json;

const Json& require_key(const Json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(where + ": missing required key '" + key + "'");
    }
    return *it;
}

const Json& require_array(const Json& obj, const char* key, const std::string& where) {
    const Json& value = require_key(obj, key, where);
    if (!value.is_array()) {
        throw ParseError(where + ": key '" + key + "' must be an array");
    }
    return value;
}

std::int64_t integer_at(const Json& arr, std::size_t i, const char* key, const std::string& where) {
    const Json& v = arr[i];
    if (v.is_number_integer()) {
        return v.get<std::int64_t>();
    }
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d)) {
            return static_cast<std::int64_t>(d);
        }
    }
    throw ParseError(where + ": key '" + key + "' entry " + std::to_string(i) +
                     " is not an integer");
}

double number_at(const Json& arr, std::size_t i, const char* key, const std::string& where) {
    const Json& v = arr[i];
    if (!v.is_number()) {
        throw ParseError(where + ": key '" + key + "' entry " + std::to_string(i) +
                         " is not a number");
    }
    return v.get<double>();
}

std::vector<std::uint8_t> raw_bytes(const Json& v, const std::string& where) {
    std::vector<std::uint8_t> out;
    if (v.is_null()) {
        return out;
    }
    if (v.is_array()) {
        out.reserve(v.size());
        for (const Json& b : v) {
            if (!b.is_number_integer() || b.get<std::int64_t>() < 0 || b.get<std::int64_t>() > 255) {
                throw ParseError(where + ": key 'L4_raw_payload' holds a non-byte value");
            }
            out.push_back(static_cast<std::uint8_t>(b.get<std::int64_t>()));
        }
        return out;
    }
    if (v.is_string()) {
        auto bytes = detail::from_hex(v.get_ref<const std::string&>());
        if (!bytes) {
            throw ParseError(where + ": key 'L4_raw_payload' has invalid hex");
        }
        return std::move(*bytes);
    }
    throw ParseError(where + ": key 'L4_raw_payload' entries must be byte arrays or hex strings");
}

Flow parse_biflow(const std::string& key, const Json& entry) {
    const std::string where = "biflow '" + key + "'";
    if (!entry.is_object()) {
        throw ParseError(where + ": entry must be an object");
    }
    const Json* packet_data = &entry;
    if (auto it = entry.find("packet_data"); it != entry.end()) {
        if (!it->is_object()) {
            throw ParseError(where + ": key 'packet_data' must be an object");
        }
        packet_data = &*it;
    }
    const Json* metadata = &entry;
    if (auto it = entry.find("flow_metadata"); it != entry.end()) {
        if (!it->is_object()) {
            throw ParseError(where + ": key 'flow_metadata' must be an object");
        }
        metadata = &*it;
    }

    const Json& label = require_key(*metadata, "BF_label", where);
    if (!label.is_string()) {
        throw ParseError(where + ": key 'BF_label' must be a string");
    }

    const Json& src_port = require_array(*packet_data, "src_port", where);
    const Json& dst_port = require_array(*packet_data, "dst_port", where);
    const Json& packet_dir = require_array(*packet_data, "packet_dir", where);
    const Json& payload_bytes = require_array(*packet_data, "L4_payload_bytes", where);
    const Json& iat = require_array(*packet_data, "iat", where);
    const Json& win = require_array(*packet_data, "TCP_win_size", where);

    const std::size_t n = payload_bytes.size();
    for (const auto& [name, arr] : {std::pair{"src_port", &src_port}, {"dst_port", &dst_port},
                                    {"packet_dir", &packet_dir}, {"iat", &iat},
                                    {"TCP_win_size", &win}}) {
        if (arr->size() != n) {
            throw SchemaError(where + ": key '" + name + "' has " + std::to_string(arr->size()) +
                              " entries, expected " + std::to_string(n));
        }
    }
    if (n == 0) {
        throw SchemaError(where + ": flow has no packets");
    }

    const Json* raw = nullptr;
    if (auto it = packet_data->find("L4_raw_payload"); it != packet_data->end() && !it->is_null()) {
        if (!it->is_array()) {
            throw ParseError(where + ": key 'L4_raw_payload' must be an array");
        }
        raw = &*it;
    }

    Flow flow;
    flow.flow_id = key;
    flow.app_label = label.get<std::string>();
    if (auto it = packet_data->find("timestamp"); it != packet_data->end() && it->is_array() &&
                                                  !it->empty() && (*it)[0].is_number()) {
        flow.start_time = (*it)[0].get<double>();
    }

    flow.packets.reserve(n);
    double clock = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Packet p;
        p.seq = static_cast<std::uint32_t>(i);

        const std::int64_t dir = integer_at(packet_dir, i, "packet_dir", where);
        if (dir != 0 && dir != 1) {
            throw SchemaError(where + ": key 'packet_dir' entry " + std::to_string(i) +
                              " is " + std::to_string(dir) + ", expected 0 or 1");
        }
        p.direction = static_cast<Direction>(dir);

        const std::int64_t sp = integer_at(src_port, i, "src_port", where);
        const std::int64_t dp = integer_at(dst_port, i, "dst_port", where);
        if (sp < 0 || sp > 65535 || dp < 0 || dp > 65535) {
            throw SchemaError(where + ": port out of range at packet " + std::to_string(i));
        }
        p.src_port = static_cast<std::uint16_t>(sp);
        p.dst_port = static_cast<std::uint16_t>(dp);

        const std::int64_t w = integer_at(win, i, "TCP_win_size", where);
        if (w < 0) {
            throw SchemaError(where + ": key 'TCP_win_size' is negative at packet " +
                              std::to_string(i));
        }
        p.tcp_win_size = static_cast<std::uint32_t>(w);

        const std::int64_t len = integer_at(payload_bytes, i, "L4_payload_bytes", where);
        if (len < 0) {
            throw SchemaError(where + ": key 'L4_payload_bytes' is negative at packet " +
                              std::to_string(i));
        }

        double gap = number_at(iat, i, "iat", where);
        if (!std::isfinite(gap) || gap < 0.0) {
            throw SchemaError(where + ": key 'iat' entry " + std::to_string(i) +
                              " must be non-negative");
        }
        if (i == 0) {
            gap = 0.0;  // the first inter-arrival is defined as zero
        }
        p.iat = gap;
        clock += gap;
        p.timestamp = clock;

        // Raw payloads cover only a prefix of packets and may be truncated;
        // the rest is deterministic filler so lengths stay exact.
        std::vector<std::uint8_t> bytes;
        if (raw != nullptr && i < raw->size()) {
            bytes = raw_bytes((*raw)[i], where);
        }
        const auto want = static_cast<std::size_t>(len);
        if (bytes.size() > want) {
            bytes.resize(want);
        } else if (bytes.size() < want) {
            auto filler = synthetic_payload(flow.flow_id, p.seq, want);
            bytes.insert(bytes.end(), filler.begin() + static_cast<std::ptrdiff_t>(bytes.size()),
                         filler.end());
        }
        p.payload = std::move(bytes);
        flow.packets.push_back(std::move(p));
    }
    return flow;
}

}  // namespace

std::vector<Flow> parse_mirage_json(std::string_view document) {
    Json root;
    try {
        root = Json::parse(document.begin(), document.end());
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("malformed MIRAGE document: ") + e.what());
    }
    if (!root.is_object()) {
        throw ParseError("MIRAGE document must be a JSON object of biflow entries");
    }
    std::vector<Flow> flows;
    flows.reserve(root.size());
    for (const auto& [key, entry] : root.items()) {
        flows.push_back(parse_biflow(key, entry));
    }
    return flows;
}

}  // namespace skewmorph
