#pragma once

// Reference computations for mutation plans that do not go through the planner:
// the cost is read back from the mutated bytes, and the best achievable cost on
// small flows comes from exhaustive enumeration.

#include "skewmorph/errors.hpp"
#include "skewmorph/mutation.hpp"
#include "skewmorph/target_dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>
#include <vector>

namespace skewmorph::oracle {

constexpr std::uint32_t kH = kRecordHeaderLen;

/// Transport cost recomputed from the wire: destination bin from the packet
/// size, source bin and source packet count from the record headers.
inline double cost_from_bytes(const MutatedFlow& mf, const LengthGrid& grid) {
    double total = 0.0;
    std::set<std::uint32_t> sources;
    for (const MutatedPacket& m : mf.packets) {
        if (m.bytes.empty()) continue;
        const double dest = grid.center(grid.bin_of(static_cast<std::uint32_t>(m.bytes.size())));
        for (const auto& r : parse_records(m.bytes)) {
            sources.insert(r.header.seq);
            const double share = double(r.header.len) / double(r.header.total);
            total += share * std::abs(dest - grid.center(grid.bin_of(r.header.total + kH)));
        }
    }
    return sources.empty() ? 0.0 : total / static_cast<double>(sources.size());
}

/// Packets per bin among the non-empty mutated packets.
inline std::vector<std::size_t> bin_counts(const MutatedFlow& mf, const LengthGrid& grid) {
    std::vector<std::size_t> counts(grid.bins(), 0);
    for (const MutatedPacket& m : mf.packets) {
        if (!m.bytes.empty()) ++counts[grid.bin_of(static_cast<std::uint32_t>(m.bytes.size()))];
    }
    return counts;
}

inline double tv_from_bytes(const MutatedFlow& mf, const TargetHistogram& target) {
    const auto counts = bin_counts(mf, target.grid);
    double n = 0;
    for (std::size_t c : counts) n += double(c);
    std::vector<double> p;
    for (std::size_t c : counts) p.push_back(double(c) / n);
    return total_variation(p, target.probs);
}

/// Exhaustive search over coverage-valid plans: every payload byte travels in
/// exactly one record, records in one packet share a direction, and each packet
/// fits in max_len. Cut points are restricted to those that make a packet's
/// content land exactly on a bin edge (first or last length of a bin).
class Enumerator {
public:
    Enumerator(const Flow& flow, const LengthGrid& grid) : grid_(grid) {
        if (grid.bins() * kCountBits > 64) throw DomainError("enumerator supports at most 5 bins");
        for (const Packet& p : flow.packets) {
            const std::uint32_t len = p.payload_len();
            if (len == 0) continue;
            start_.push_back({static_cast<int>(p.direction), grid.bin_of(len + kH), len, len});
        }
        std::sort(start_.begin(), start_.end());
        for (std::size_t b = 0; b < grid.bins(); ++b) {
            for (std::uint32_t edge : {grid.floor(b) + 1, grid.top(b)}) {
                if (edge > kH && edge <= grid.max_len) edges_.push_back(edge);
            }
        }
    }

    /// Lowest cost among plans whose bin histogram is within tv_bound of the target.
    double best_cost(const TargetHistogram& target, double tv_bound) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [key, sum] : solve(start_)) {
            double n = 0;
            std::vector<double> p(grid_.bins());
            for (std::size_t j = 0; j < p.size(); ++j) n += p[j] = double(key >> (kCountBits * j) & kCountMask);
            for (double& x : p) x /= n;
            if (total_variation(p, target.probs) <= tv_bound) best = std::min(best, sum / double(start_.size()));
        }
        return best;
    }

    /// Lowest cost among plans with exactly these packet counts per bin.
    double best_cost(const std::vector<std::size_t>& counts) {
        std::uint64_t key = 0;
        for (std::size_t j = 0; j < counts.size(); ++j) key += std::uint64_t{counts[j]} << (kCountBits * j);
        const Outcomes& all = solve(start_);
        const auto it = all.find(key);
        return it == all.end() ? std::numeric_limits<double>::infinity() : it->second / double(start_.size());
    }

    std::size_t states() const { return memo_.size(); }

private:
    struct Piece {
        int dir = 0;
        std::size_t sbin = 0;
        std::uint32_t len = 0;
        std::uint32_t total = 0;  // length of the source packet
        auto operator<=>(const Piece&) const = default;
    };
    using State = std::vector<Piece>;
    // bin counts of the packets built so far, packed into one key -> lowest summed packet cost
    using Outcomes = std::unordered_map<std::uint64_t, double>;
    static constexpr unsigned kCountBits = 12;
    static constexpr std::uint64_t kCountMask = (1u << kCountBits) - 1;

    const Outcomes& solve(const State& state) {
        if (auto it = memo_.find(state); it != memo_.end()) return it->second;
        Outcomes out;
        if (state.empty()) {
            out[0] = 0.0;
            return memo_[state] = out;
        }
        const Piece& first = state.front();
        std::vector<std::size_t> same;
        for (std::size_t i = 1; i < state.size(); ++i) {
            if (state[i].dir == first.dir) same.push_back(i);
        }
        for (std::size_t mask = 0; mask < (std::size_t{1} << same.size()); ++mask) {
            std::vector<std::size_t> members = {0};
            for (std::size_t k = 0; k < same.size(); ++k) {
                if (mask >> k & 1) members.push_back(same[k]);
            }
            std::uint32_t content = 0;
            for (std::size_t i : members) content += state[i].len + kH;

            State rest;
            for (std::size_t i = 0; i < state.size(); ++i) {
                if (std::find(members.begin(), members.end(), i) == members.end()) rest.push_back(state[i]);
            }
            std::vector<std::uint32_t> taken;
            for (std::size_t i : members) taken.push_back(state[i].len);

            if (content <= grid_.max_len) emit(out, state, members, taken, content, rest);
            for (std::size_t m = 0; m < members.size(); ++m) {
                const Piece& cut = state[members[m]];
                const std::uint32_t others = content - cut.len;
                for (std::uint32_t edge : edges_) {
                    if (edge <= others) continue;
                    const std::uint32_t k = edge - others;
                    if (k >= cut.len) continue;
                    auto t = taken;
                    t[m] = k;
                    State next = rest;
                    next.push_back({cut.dir, cut.sbin, cut.len - k, cut.total});
                    std::sort(next.begin(), next.end());
                    emit(out, state, members, t, edge, next);
                }
            }
        }
        return memo_[state] = out;
    }

    void emit(Outcomes& out, const State& state, const std::vector<std::size_t>& members,
              const std::vector<std::uint32_t>& taken, std::uint32_t content, const State& next) {
        const Outcomes& sub = solve(next);
        for (std::size_t b = grid_.bin_of(content); b < grid_.bins(); ++b) {
            double cost = 0.0;
            for (std::size_t m = 0; m < members.size(); ++m) {
                const Piece& p = state[members[m]];
                cost += double(taken[m]) / double(p.total) * std::abs(grid_.center(b) - grid_.center(p.sbin));
            }
            for (const auto& [key, sum] : sub) {
                auto [it, fresh] = out.emplace(key + (std::uint64_t{1} << (kCountBits * b)), sum + cost);
                if (!fresh) it->second = std::min(it->second, sum + cost);
            }
        }
    }

    LengthGrid grid_;
    State start_;
    std::vector<std::uint32_t> edges_;
    std::map<State, Outcomes> memo_;
};

}  // namespace skewmorph::oracle
