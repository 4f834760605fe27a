#include "skewmorph/errors.hpp"
#include "skewmorph/trace_model.hpp"

#include <algorithm>
#include <cmath>

namespace skewmorph {

void LengthGrid::validate() const {
    if (bin_width < 1) {
        throw DomainError("bin_width must be at least 1");
    }
    if (max_len < 1) {
        throw DomainError("max_len must be at least 1");
    }
}

std::size_t LengthGrid::bin_of(std::uint32_t len) const {
    if (len == 0) {
        throw DomainError("zero length has no bin");
    }
    if (len >= max_len) {
        return bins() - 1;
    }
    return (len - 1) / bin_width;
}

std::uint32_t LengthGrid::top(std::size_t bin) const {
    const std::uint64_t edge = (static_cast<std::uint64_t>(bin) + 1) * bin_width;
    return static_cast<std::uint32_t>(std::min<std::uint64_t>(edge, max_len));
}

std::optional<LengthHistogram> histogram_of_lengths(std::span<const std::uint32_t> lengths,
                                                    const LengthGrid& grid) {
    grid.validate();
    LengthHistogram h{grid, std::vector<double>(grid.bins(), 0.0)};
    std::vector<std::size_t> counts(grid.bins(), 0);
    std::size_t total = 0;
    for (std::uint32_t len : lengths) {
        if (len == 0) continue;
        ++counts[grid.bin_of(len)];
        ++total;
    }
    if (total == 0) {
        return std::nullopt;
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
        h.probs[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return h;
}

std::optional<LengthHistogram> length_histogram(const Flow& flow, const LengthGrid& grid) {
    std::vector<std::uint32_t> lengths;
    lengths.reserve(flow.packets.size());
    for (const Packet& p : flow.packets) {
        lengths.push_back(p.payload_len());
    }
    return histogram_of_lengths(lengths, grid);
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw DomainError("total_variation: size mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sum += std::abs(p[i] - q[i]);
    }
    return 0.5 * sum;
}

}  // namespace skewmorph
