#include "skewmorph/errors.hpp"
#include "skewmorph/mutation.hpp"

#include <algorithm>
#include <string>

namespace skewmorph {
namespace {

void put_be(std::vector<std::uint8_t>& out, std::uint32_t value, int bytes) {
    for (int i = bytes - 1; i >= 0; --i) {
        out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
}

std::uint32_t get_be(const std::uint8_t* p, int bytes) {
    std::uint32_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        v = (v << 8) | p[i];
    }
    return v;
}

}  // namespace

void append_record(std::vector<std::uint8_t>& out, const RecordHeader& header,
                   std::span<const std::uint8_t> payload) {
    if (payload.size() != header.len) {
        throw FramingError("record payload size does not match its header");
    }
    out.push_back(static_cast<std::uint8_t>(header.type));
    put_be(out, header.seq, 4);
    put_be(out, header.len, 2);
    put_be(out, header.offset, 2);
    put_be(out, header.total, 2);
    out.insert(out.end(), payload.begin(), payload.end());
}

std::vector<ParsedRecord> parse_records(std::span<const std::uint8_t> packet) {
    std::vector<ParsedRecord> records;
    std::size_t pos = 0;
    const std::size_t n = packet.size();
    while (pos < n) {
        const auto rest = packet.subspan(pos);
        const bool all_zero = std::all_of(rest.begin(), rest.end(), [](std::uint8_t b) { return b == 0; });
        if (all_zero) {
            break;
        }
        if (rest.size() < kRecordHeaderLen) {
            throw FramingError("truncated record header at byte " + std::to_string(pos));
        }
        const std::uint8_t type = rest[0];
        if (type > 1) {
            throw FramingError("unknown record type " + std::to_string(type) + " at byte " +
                               std::to_string(pos));
        }
        RecordHeader h;
        h.type = static_cast<RecordType>(type);
        h.seq = get_be(rest.data() + 1, 4);
        h.len = static_cast<std::uint16_t>(get_be(rest.data() + 5, 2));
        h.offset = static_cast<std::uint16_t>(get_be(rest.data() + 7, 2));
        h.total = static_cast<std::uint16_t>(get_be(rest.data() + 9, 2));
        if (h.len == 0) {
            throw FramingError("empty record at byte " + std::to_string(pos));
        }
        if (h.len > rest.size() - kRecordHeaderLen) {
            throw FramingError("record at byte " + std::to_string(pos) + " overruns the packet");
        }
        records.push_back({h, rest.subspan(kRecordHeaderLen, h.len)});
        pos += kRecordHeaderLen + h.len;
    }
    return records;
}

const char* to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::keep: return "keep";
        case ActionKind::pad: return "pad";
        case ActionKind::fragment: return "fragment";
        case ActionKind::stack_member: return "stack_member";
    }
    return "unknown";
}

}  // namespace skewmorph
