#pragma once

#include "skewmorph/target_dist.hpp"
#include "skewmorph/trace_model.hpp"

#include <string>
#include <vector>

namespace skewmorph::testing {

/// Flow with the given payload lengths; directions alternate unless given.
inline Flow make_flow(const std::vector<std::uint32_t>& lengths, std::vector<int> dirs = {},
                      std::string id = "f") {
    Flow f;
    f.flow_id = id;
    f.app_label = "app";
    f.start_time = 1000.0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        Packet p;
        p.seq = static_cast<std::uint32_t>(i);
        p.timestamp = 0.01 * static_cast<double>(i);
        p.iat = i == 0 ? 0.0 : 0.01;
        p.direction = static_cast<Direction>(dirs.empty() ? int(i % 2) : dirs[i]);
        p.payload = synthetic_payload(id, p.seq, lengths[i]);
        p.src_port = 40000;
        p.dst_port = 443;
        p.tcp_win_size = 65535;
        f.packets.push_back(std::move(p));
    }
    return f;
}

/// Target with all mass in one bin.
inline TargetHistogram point_target(const LengthGrid& grid, std::size_t bin) {
    TargetHistogram t;
    t.grid = grid;
    t.probs.assign(grid.bins(), 0.0);
    t.probs.at(bin) = 1.0;
    return t;
}

inline TargetHistogram target_from(const LengthGrid& grid, std::vector<double> probs) {
    TargetHistogram t;
    t.grid = grid;
    t.probs = std::move(probs);
    return t;
}

}  // namespace skewmorph::testing
