#pragma once

#include "skewmorph/target_dist.hpp"
#include "skewmorph/trace_model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace skewmorph {

// ---------------------------------------------------------------------------
// Record framing
//
// Header, big-endian, 11 bytes:
//   type(1: 0 whole, 1 fragment) | seq(4) | len(2) | offset(2) | total(2)
// A mutated payload is a run of records followed by zero or more 0x00 bytes.

inline constexpr std::uint32_t kRecordHeaderLen = 11;

enum class RecordType : std::uint8_t { whole = 0, fragment = 1 };

struct RecordHeader {
    RecordType type = RecordType::whole;
    std::uint32_t seq = 0;
    std::uint16_t len = 0;
    std::uint16_t offset = 0;
    std::uint16_t total = 0;

    bool operator==(const RecordHeader&) const = default;
};

struct ParsedRecord {
    RecordHeader header;
    std::span<const std::uint8_t> payload;
};

/// Appends header + payload. payload.size() must equal header.len.
void append_record(std::vector<std::uint8_t>& out, const RecordHeader& header,
                   std::span<const std::uint8_t> payload);

/// Splits a mutated payload into records; throws FramingError on a malformed stream.
std::vector<ParsedRecord> parse_records(std::span<const std::uint8_t> packet);

// ---------------------------------------------------------------------------
// Planning

enum class ActionKind : std::uint8_t {
    keep,          // single whole record, no padding
    pad,           // single whole record, zero-padded to the bin top
    fragment,      // part of a source packet
    stack_member,  // whole record sharing a mutated packet with others
};

const char* to_string(ActionKind kind);

/// One record of the mutated flow. Actions sharing a group_id form one mutated
/// packet and are stored contiguously in record order.
struct MutationAction {
    ActionKind kind = ActionKind::keep;
    std::uint32_t packet_seq = 0;
    Direction direction = Direction::upstream;
    std::uint32_t source_len = 0;       // original payload_len of the source packet
    std::uint32_t fragment_offset = 0;  // byte offset into the source payload
    std::uint32_t length = 0;           // payload bytes carried by this record
    std::uint32_t target_len = 0;       // final length of the mutated packet
    std::uint32_t group_id = 0;

    bool operator==(const MutationAction&) const = default;
};

struct MutationPlan {
    std::string flow_id;
    LengthGrid grid;
    std::vector<MutationAction> actions;
    /// Histogram of framed source lengths (payload + one record header).
    LengthHistogram src_hist;
    TargetHistogram tgt_hist;
    std::vector<double> gap;
    double cost = 0.0;
};

/// tgt - src per bin. Throws DomainError when the grids differ.
std::vector<double> per_bin_gap(const LengthHistogram& src, const TargetHistogram& tgt);

/// Transport cost of a plan: each of the N source packets carries mass 1/N,
/// split across its records by payload bytes; each share pays |P| * |L - L'|
/// with L the centre of the source bin (framed length) and L' that of the
/// destination packet.
double plan_cost(const MutationPlan& plan);

/// Seeded greedy transport of the flow's length histogram onto `target`
/// using padding, fragmenting and stacking.
MutationPlan plan_mutation(const Flow& flow, const TargetHistogram& target, std::uint64_t seed);

/// Baseline that only pads: every packet is padded up to a destination bin
/// drawn from the target, or left alone when the draw is not above its own bin.
MutationPlan plan_pad_only(const Flow& flow, const TargetHistogram& target, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Application and recovery

struct MutatedPacket {
    double timestamp = 0.0;
    Direction direction = Direction::upstream;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint32_t tcp_win_size = 0;
    std::vector<std::uint8_t> bytes;

    bool operator==(const MutatedPacket&) const = default;
};

struct MutatedFlow {
    std::string flow_id;
    std::string app_label;
    std::optional<double> start_time;
    std::vector<MutatedPacket> packets;

    bool operator==(const MutatedFlow&) const = default;
};

/// Checks a plan against its flow; throws PlanValidationError.
void validate_plan(const Flow& flow, const MutationPlan& plan);

MutatedFlow apply_plan(const Flow& flow, const MutationPlan& plan);

/// Rebuilds the source flow from the records. Payloads, lengths, directions
/// and ports are exact; timestamps are those of the carrying packets.
Flow recover(const MutatedFlow& mutated);

/// (L_mutate - L_origin) / L_origin over total payload bytes.
double overhead(const Flow& origin, const MutatedFlow& mutated);

/// The flow as seen on the wire after mutation: one packet per mutated packet.
Flow observed_flow(const MutatedFlow& mutated);

/// Inverse of observed_flow, for mutated flows read back from the line format.
MutatedFlow mutated_from_observed(const Flow& flow);

/// Lengths of non-empty mutated packets.
std::vector<std::uint32_t> mutated_lengths(const MutatedFlow& mutated);

}  // namespace skewmorph
