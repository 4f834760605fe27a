#include "skewmorph/errors.hpp"
#include "skewmorph/trace_model.hpp"

#include <algorithm>
#include <cmath>

namespace skewmorph {

std::vector<double> directional_series(const Flow& flow, SeriesKind kind, SeriesDirection dir) {
    std::vector<double> out;
    out.reserve(flow.packets.size());
    const Packet* prev = nullptr;
    for (const Packet& p : flow.packets) {
        if (dir != SeriesDirection::bi && static_cast<int>(p.direction) != static_cast<int>(dir)) {
            continue;
        }
        if (kind == SeriesKind::length) {
            out.push_back(static_cast<double>(p.payload_len()));
        } else if (dir == SeriesDirection::bi) {
            out.push_back(p.iat);
        } else {
            // gap to the previous packet travelling the same way
            out.push_back(prev == nullptr ? 0.0 : p.timestamp - prev->timestamp);
        }
        prev = &p;
    }
    return out;
}

SeriesStats describe_series(std::span<const double> values) {
    SeriesStats s{};
    const std::size_t n = values.size();
    if (n == 0) {
        return s;
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    s[0] = lo;
    s[1] = hi;

    if (lo == hi) {
        // constant series: every location statistic is the value, every spread is 0
        s[2] = lo;
        std::fill(s.begin() + 8, s.end(), lo);
        return s;
    }

    double sum = 0.0;
    for (double v : values) sum += v;
    const double nd = static_cast<double>(n);
    const double mean = sum / nd;
    s[2] = mean;

    double m2 = 0.0, m3 = 0.0, m4 = 0.0, abs_dev = 0.0;
    for (double v : values) {
        const double d = v - mean;
        const double d2 = d * d;
        abs_dev += std::abs(d);
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    s[5] = abs_dev / nd;
    if (n >= 2) {
        const double var = m2 / (nd - 1.0);
        s[3] = std::sqrt(var);
        s[4] = var;
    }
    m2 /= nd;
    m3 /= nd;
    m4 /= nd;
    if (n >= 3 && m2 > 0.0) {
        const double g1 = m3 / std::pow(m2, 1.5);
        s[6] = g1 * std::sqrt(nd * (nd - 1.0)) / (nd - 2.0);
    }
    if (n >= 4 && m2 > 0.0) {
        const double g2 = m4 / (m2 * m2) - 3.0;
        s[7] = (nd - 1.0) / ((nd - 2.0) * (nd - 3.0)) * ((nd + 1.0) * g2 + 6.0);
    }

    for (int k = 1; k <= 9; ++k) {
        const double pos = (k / 10.0) * (nd - 1.0);
        const auto idx = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(idx);
        double v = sorted[idx];
        if (idx + 1 < n && frac > 0.0) {
            v += frac * (sorted[idx + 1] - sorted[idx]);
        }
        s[7 + static_cast<std::size_t>(k)] = v;
    }
    return s;
}

FlowFeatureVector extract_features(const Flow& flow, const FeatureOptions& options) {
    if (flow.packets.empty()) {
        throw DomainError("cannot extract features from an empty flow");
    }
    FlowFeatureVector fv;
    std::size_t offset = 0;
    for (SeriesKind kind : {SeriesKind::length, SeriesKind::iat}) {
        for (SeriesDirection dir : {SeriesDirection::up, SeriesDirection::down, SeriesDirection::bi}) {
            if (kind == SeriesKind::length || options.use_iat) {
                const auto values = directional_series(flow, kind, dir);
                const SeriesStats stats = describe_series(values);
                std::copy(stats.begin(), stats.end(), fv.values.begin() + static_cast<std::ptrdiff_t>(offset));
            }
            offset += kStatsPerSeries;
        }
    }
    return fv;
}

std::string feature_name(std::size_t index) {
    static constexpr const char* kStat[] = {"min", "max", "mean", "std", "var", "mad",
                                            "skew", "kurtosis", "p10", "p20", "p30",
                                            "p40", "p50", "p60", "p70", "p80", "p90"};
    static constexpr const char* kDir[] = {"up", "down", "bi"};
    if (index >= kFeatureCount) {
        throw DomainError("feature index out of range");
    }
    const std::size_t series = index / kStatsPerSeries;
    const char* kind = series < 3 ? "length" : "iat";
    return std::string(kind) + "_" + kDir[series % 3] + "_" + kStat[index % kStatsPerSeries];
}

}  // namespace skewmorph
