#include "skewmorph/errors.hpp"
#include "skewmorph/seeding.hpp"
#include "skewmorph/trace_model.hpp"

#include <cmath>

namespace skewmorph {

void validate_flow(const Flow& flow) {
    if (flow.packets.empty()) {
        throw SchemaError("flow '" + flow.flow_id + "' has no packets");
    }
    double prev_ts = 0.0;
    for (std::size_t i = 0; i < flow.packets.size(); ++i) {
        const Packet& p = flow.packets[i];
        const std::string where = "flow '" + flow.flow_id + "' packet " + std::to_string(i);
        if (p.seq != i) {
            throw SchemaError(where + ": seq " + std::to_string(p.seq) + " is not contiguous");
        }
        if (!std::isfinite(p.timestamp) || p.timestamp < 0.0) {
            throw SchemaError(where + ": timestamp must be finite and non-negative");
        }
        if (!std::isfinite(p.iat) || p.iat < 0.0) {
            throw SchemaError(where + ": iat must be finite and non-negative");
        }
        if (i == 0 && p.iat != 0.0) {
            throw SchemaError(where + ": first packet must have iat 0");
        }
        if (i > 0 && p.timestamp < prev_ts) {
            throw SchemaError(where + ": timestamps decrease");
        }
        if (p.direction != Direction::upstream && p.direction != Direction::downstream) {
            throw SchemaError(where + ": direction must be 0 or 1");
        }
        prev_ts = p.timestamp;
    }
}

std::vector<std::uint8_t> synthetic_payload(std::string_view flow_id, std::uint32_t seq,
                                            std::size_t len) {
    std::vector<std::uint8_t> out(len);
    std::uint64_t state = derive_seed(fnv1a64(flow_id), std::uint64_t{seq});
    std::size_t i = 0;
    while (i < len) {
        state = splitmix64(state);
        std::uint64_t word = state;
        for (int b = 0; b < 8 && i < len; ++b, ++i) {
            out[i] = static_cast<std::uint8_t>(word & 0xff);
            word >>= 8;
        }
    }
    return out;
}

}  // namespace skewmorph
