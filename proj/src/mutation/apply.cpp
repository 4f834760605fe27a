#include "skewmorph/errors.hpp"
#include "skewmorph/mutation.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace skewmorph {
namespace {

constexpr std::uint32_t kH = kRecordHeaderLen;

[[noreturn]] void reject(const std::string& what) {
    throw PlanValidationError(what);
}

MutatedPacket carrier_of(const Packet& p) {
    MutatedPacket m;
    m.timestamp = p.timestamp;
    m.direction = p.direction;
    m.src_port = p.src_port;
    m.dst_port = p.dst_port;
    m.tcp_win_size = p.tcp_win_size;
    return m;
}

}  // namespace

void validate_plan(const Flow& flow, const MutationPlan& plan) {
    if (plan.flow_id != flow.flow_id) {
        reject("plan for flow '" + plan.flow_id + "' applied to flow '" + flow.flow_id + "'");
    }
    const std::size_t n = flow.packets.size();
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> cover(n);

    std::size_t i = 0;
    std::vector<bool> seen_group;
    while (i < plan.actions.size()) {
        const std::uint32_t gid = plan.actions[i].group_id;
        if (gid < seen_group.size() && seen_group[gid]) {
            reject("records of group " + std::to_string(gid) + " are not contiguous");
        }
        if (gid >= seen_group.size()) seen_group.resize(gid + 1, false);
        seen_group[gid] = true;

        std::uint64_t content = 0;
        const MutationAction& head = plan.actions[i];
        std::size_t j = i;
        for (; j < plan.actions.size() && plan.actions[j].group_id == gid; ++j) {
            const MutationAction& a = plan.actions[j];
            if (a.packet_seq >= n) {
                reject("action references unknown packet " + std::to_string(a.packet_seq));
            }
            const Packet& p = flow.packets[a.packet_seq];
            if (p.payload_len() != a.source_len) {
                reject("source length of packet " + std::to_string(a.packet_seq) + " does not match");
            }
            if (a.direction != p.direction || a.direction != head.direction) {
                reject("group " + std::to_string(gid) + " mixes directions");
            }
            if (a.length == 0 || std::uint64_t{a.fragment_offset} + a.length > a.source_len) {
                reject("record of packet " + std::to_string(a.packet_seq) + " lies outside its payload");
            }
            if (a.target_len != head.target_len) {
                reject("group " + std::to_string(gid) + " has inconsistent target lengths");
            }
            cover[a.packet_seq].push_back({a.fragment_offset, a.length});
            content += a.length + kH;
        }
        if (head.target_len > plan.grid.max_len) {
            reject("group " + std::to_string(gid) + " exceeds max_len");
        }
        if (content > head.target_len) {
            reject("group " + std::to_string(gid) + " carries more bytes than its target length");
        }
        i = j;
    }

    for (std::size_t s = 0; s < n; ++s) {
        auto& parts = cover[s];
        const std::uint32_t len = flow.packets[s].payload_len();
        if (len == 0) {
            if (!parts.empty()) reject("zero-payload packet " + std::to_string(s) + " has records");
            continue;
        }
        std::sort(parts.begin(), parts.end());
        std::uint32_t at = 0;
        for (const auto& [off, l] : parts) {
            if (off != at) {
                reject("payload of packet " + std::to_string(s) + " is not covered exactly once");
            }
            at += l;
        }
        if (at != len) {
            reject("payload of packet " + std::to_string(s) + " is not covered exactly once");
        }
    }
}

MutatedFlow apply_plan(const Flow& flow, const MutationPlan& plan) {
    validate_flow(flow);
    validate_plan(flow, plan);

    using Key = std::pair<std::uint32_t, std::uint32_t>;
    std::vector<std::pair<Key, MutatedPacket>> out;

    std::size_t i = 0;
    while (i < plan.actions.size()) {
        const std::uint32_t gid = plan.actions[i].group_id;
        Key key{~0u, 0};
        std::vector<std::uint8_t> bytes;
        std::size_t j = i;
        for (; j < plan.actions.size() && plan.actions[j].group_id == gid; ++j) {
            const MutationAction& a = plan.actions[j];
            const Packet& p = flow.packets[a.packet_seq];
            RecordHeader h;
            h.type = a.length == a.source_len ? RecordType::whole : RecordType::fragment;
            h.seq = a.packet_seq;
            h.len = static_cast<std::uint16_t>(a.length);
            h.offset = static_cast<std::uint16_t>(a.fragment_offset);
            h.total = static_cast<std::uint16_t>(a.source_len);
            append_record(bytes, h, std::span(p.payload).subspan(a.fragment_offset, a.length));
            key = std::min(key, Key{a.packet_seq, a.fragment_offset});
        }
        bytes.resize(plan.actions[i].target_len, 0);
        MutatedPacket m = carrier_of(flow.packets[key.first]);
        m.bytes = std::move(bytes);
        out.push_back({key, std::move(m)});
        i = j;
    }
    for (const Packet& p : flow.packets) {
        if (p.payload_len() == 0) {
            out.push_back({Key{p.seq, 0}, carrier_of(p)});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    MutatedFlow mf;
    mf.flow_id = flow.flow_id;
    mf.app_label = flow.app_label;
    mf.start_time = flow.start_time;
    for (auto& [k, m] : out) mf.packets.push_back(std::move(m));
    return mf;
}

Flow recover(const MutatedFlow& mutated) {
    struct Part {
        RecordHeader header;
        std::span<const std::uint8_t> payload;
        std::size_t carrier;
    };
    std::map<std::uint32_t, std::vector<Part>> by_seq;
    std::vector<std::size_t> empties;
    for (std::size_t i = 0; i < mutated.packets.size(); ++i) {
        const auto& bytes = mutated.packets[i].bytes;
        if (bytes.empty()) {
            empties.push_back(i);
            continue;
        }
        const auto records = parse_records(bytes);
        if (records.empty()) {
            throw FramingError("mutated packet " + std::to_string(i) + " carries no records");
        }
        for (const ParsedRecord& r : records) {
            by_seq[r.header.seq].push_back({r.header, r.payload, i});
        }
    }

    const std::size_t n = by_seq.size() + empties.size();
    Flow flow;
    flow.flow_id = mutated.flow_id;
    flow.app_label = mutated.app_label;
    flow.start_time = mutated.start_time;
    flow.packets.resize(n);

    std::vector<bool> filled(n, false);
    for (auto& [seq, parts] : by_seq) {
        const std::string who = "packet " + std::to_string(seq);
        if (seq >= n) {
            throw CorruptionError(who + " is beyond the recovered flow length");
        }
        std::sort(parts.begin(), parts.end(),
                  [](const Part& a, const Part& b) { return a.header.offset < b.header.offset; });
        const std::uint16_t total = parts.front().header.total;
        Packet& p = flow.packets[seq];
        p.payload.reserve(total);
        for (const Part& part : parts) {
            const RecordHeader& h = part.header;
            if (h.total != total) {
                throw CorruptionError(who + " has fragments with different totals");
            }
            if (h.type == RecordType::whole && (parts.size() != 1 || h.offset != 0 || h.len != total)) {
                throw CorruptionError(who + " has an inconsistent whole record");
            }
            if (h.offset != p.payload.size()) {
                throw CorruptionError(who + (h.offset > p.payload.size() ? " has a gap" : " has overlapping fragments") +
                                      " at offset " + std::to_string(h.offset));
            }
            p.payload.insert(p.payload.end(), part.payload.begin(), part.payload.end());
        }
        if (p.payload.size() != total) {
            throw CorruptionError(who + " is missing trailing fragments");
        }
        const MutatedPacket& c = mutated.packets[parts.front().carrier];
        p.timestamp = c.timestamp;
        p.direction = c.direction;
        p.src_port = c.src_port;
        p.dst_port = c.dst_port;
        p.tcp_win_size = c.tcp_win_size;
        filled[seq] = true;
    }

    std::size_t next_empty = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (filled[s]) continue;
        const MutatedPacket& c = mutated.packets[empties[next_empty++]];
        Packet& p = flow.packets[s];
        p.timestamp = c.timestamp;
        p.direction = c.direction;
        p.src_port = c.src_port;
        p.dst_port = c.dst_port;
        p.tcp_win_size = c.tcp_win_size;
    }

    // a stacked packet leaves with its carrier, which may precede earlier packets
    double last = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        Packet& p = flow.packets[s];
        p.seq = static_cast<std::uint32_t>(s);
        p.timestamp = std::max(p.timestamp, last);
        p.iat = s == 0 ? 0.0 : p.timestamp - last;
        last = p.timestamp;
    }
    return flow;
}

double overhead(const Flow& origin, const MutatedFlow& mutated) {
    std::uint64_t before = 0, after = 0;
    for (const Packet& p : origin.packets) before += p.payload_len();
    for (const MutatedPacket& m : mutated.packets) after += m.bytes.size();
    if (before == 0) {
        throw DomainError("overhead of a flow without payload is undefined");
    }
    return (static_cast<double>(after) - static_cast<double>(before)) / static_cast<double>(before);
}

Flow observed_flow(const MutatedFlow& mutated) {
    Flow flow;
    flow.flow_id = mutated.flow_id;
    flow.app_label = mutated.app_label;
    flow.start_time = mutated.start_time;
    double last = 0.0;
    for (std::size_t i = 0; i < mutated.packets.size(); ++i) {
        const MutatedPacket& m = mutated.packets[i];
        Packet p;
        p.seq = static_cast<std::uint32_t>(i);
        p.timestamp = m.timestamp;
        p.direction = m.direction;
        p.payload = m.bytes;
        p.iat = i == 0 ? 0.0 : m.timestamp - last;
        p.src_port = m.src_port;
        p.dst_port = m.dst_port;
        p.tcp_win_size = m.tcp_win_size;
        last = m.timestamp;
        flow.packets.push_back(std::move(p));
    }
    return flow;
}

MutatedFlow mutated_from_observed(const Flow& flow) {
    MutatedFlow mf;
    mf.flow_id = flow.flow_id;
    mf.app_label = flow.app_label;
    mf.start_time = flow.start_time;
    for (const Packet& p : flow.packets) {
        MutatedPacket m;
        m.timestamp = p.timestamp;
        m.direction = p.direction;
        m.src_port = p.src_port;
        m.dst_port = p.dst_port;
        m.tcp_win_size = p.tcp_win_size;
        m.bytes = p.payload;
        mf.packets.push_back(std::move(m));
    }
    return mf;
}

std::vector<std::uint32_t> mutated_lengths(const MutatedFlow& mutated) {
    std::vector<std::uint32_t> out;
    for (const MutatedPacket& m : mutated.packets) {
        if (!m.bytes.empty()) out.push_back(static_cast<std::uint32_t>(m.bytes.size()));
    }
    return out;
}

}  // namespace skewmorph
