#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skewmorph {

enum class Direction : std::uint8_t { upstream = 0, downstream = 1 };

struct Packet {
    std::uint32_t seq = 0;
    double timestamp = 0.0;  // seconds since flow start
    Direction direction = Direction::upstream;
    std::vector<std::uint8_t> payload;
    double iat = 0.0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint32_t tcp_win_size = 0;

    std::uint32_t payload_len() const { return static_cast<std::uint32_t>(payload.size()); }

    bool operator==(const Packet&) const = default;
};

struct Flow {
    std::string flow_id;
    std::string app_label;
    /// Absolute time of the first packet (epoch seconds), when the source provides one.
    std::optional<double> start_time;
    std::vector<Packet> packets;

    bool operator==(const Flow&) const = default;
};

/// Throws SchemaError if the flow breaks a Packet/Flow invariant.
void validate_flow(const Flow& flow);

/// Deterministic filler bytes for sources that carry no raw payload.
std::vector<std::uint8_t> synthetic_payload(std::string_view flow_id, std::uint32_t seq,
                                            std::size_t len);

// ---------------------------------------------------------------------------
// Ingestion

/// Reads a MIRAGE-2019 style document: an object of biflow entries, each with
/// per-packet arrays (under "packet_data" or directly on the entry) and a
/// "flow_metadata" object holding BF_label.
std::vector<Flow> parse_mirage_json(std::string_view document);

/// One flow object per line; blank lines are skipped.
std::vector<Flow> parse_flow_lines(std::string_view document);

struct FlowLineOptions {
    /// Emit "payload" only when it differs from synthetic_payload().
    bool payload_only_if_custom = true;
};

std::string format_flow_line(const Flow& flow, const FlowLineOptions& options = {});
std::string format_flow_lines(std::span<const Flow> flows, const FlowLineOptions& options = {});

// ---------------------------------------------------------------------------
// Features

enum class SeriesKind : std::uint8_t { length = 0, iat = 1 };
enum class SeriesDirection : std::uint8_t { up = 0, down = 1, bi = 2 };

/// Values of one (kind, direction) series in packet order.
std::vector<double> directional_series(const Flow& flow, SeriesKind kind, SeriesDirection dir);

inline constexpr std::size_t kStatsPerSeries = 17;
inline constexpr std::size_t kFeatureCount = kStatsPerSeries * 6;

/// min, max, mean, std, var, mad, skew, kurtosis, p10..p90
using SeriesStats = std::array<double, kStatsPerSeries>;

SeriesStats describe_series(std::span<const double> values);

struct FlowFeatureVector {
    std::array<double, kFeatureCount> values{};

    bool operator==(const FlowFeatureVector&) const = default;
};

struct FeatureOptions {
    /// When false the iat block is left at zero.
    bool use_iat = true;
};

FlowFeatureVector extract_features(const Flow& flow, const FeatureOptions& options = {});

/// Human-readable name for feature index i, e.g. "length_up_p50".
std::string feature_name(std::size_t index);

// ---------------------------------------------------------------------------
// Length histograms

/// Bins over [1, max_len]: bin 0 is [1, w], bin i is (i*w, min((i+1)*w, max_len)].
struct LengthGrid {
    std::uint32_t bin_width = 64;
    std::uint32_t max_len = 1440;

    void validate() const;
    std::size_t bins() const { return (max_len + bin_width - 1) / bin_width; }
    /// Lengths above max_len clamp into the last bin. len must be >= 1.
    std::size_t bin_of(std::uint32_t len) const;
    std::uint32_t top(std::size_t bin) const;
    /// Exclusive lower edge (0 for the first bin).
    std::uint32_t floor(std::size_t bin) const { return static_cast<std::uint32_t>(bin) * bin_width; }
    double center(std::size_t bin) const { return 0.5 * (double(floor(bin)) + double(top(bin))); }

    bool operator==(const LengthGrid&) const = default;
};

struct LengthHistogram {
    LengthGrid grid;
    std::vector<double> probs;
};

/// Histogram of positive lengths on the grid; nullopt when there is nothing to count.
std::optional<LengthHistogram> histogram_of_lengths(std::span<const std::uint32_t> lengths,
                                                    const LengthGrid& grid);

/// Histogram of the flow's payload lengths; zero-payload packets are not counted.
std::optional<LengthHistogram> length_histogram(const Flow& flow, const LengthGrid& grid);

/// Half the L1 distance between two probability vectors of equal size.
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace skewmorph
