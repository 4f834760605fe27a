#include "skewmorph/errors.hpp"
#include "skewmorph/mutation.hpp"
#include "skewmorph/seeding.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace skewmorph {
namespace {

constexpr std::uint32_t kH = kRecordHeaderLen;
constexpr std::size_t kFillAttempts = 64;
constexpr std::uint64_t kHomeWindow = 8;
constexpr std::size_t kSplitLimit = 64;
// flows this small also try rotated stay orders
constexpr std::size_t kRotateItems = 16;
constexpr std::size_t kRotations = 4;
constexpr double kTvSlack = 0.02;
constexpr double kByteSlack = 0.05;

struct Item {
    std::uint32_t seq = 0;
    Direction dir = Direction::upstream;
    std::uint32_t len = 0;
    std::uint32_t framed = 0;
    std::size_t sbin = 0;
    bool stayable = false;
};

struct Piece {
    std::size_t item = 0;
    std::uint32_t offset = 0;
    std::uint32_t len = 0;
};

struct Output {
    Direction dir = Direction::upstream;
    bool padded = false;
    std::size_t bin = 0;
    std::uint32_t content = 0;
    std::vector<Piece> records;
};

struct Candidate {
    std::vector<Output> outputs;
    double tv = 0.0;
    std::uint64_t bytes = 0;
    double cost = 0.0;
    std::size_t n_out = 0;
};

struct Setup {
    LengthGrid grid;
    std::vector<Item> items;
    // stayable items per bin, in stay-priority order
    std::vector<std::vector<std::size_t>> stay_order;
    std::vector<std::size_t> forced;
};

Setup prepare(const Flow& flow, const TargetHistogram& target, std::uint64_t seed) {
    Setup s;
    s.grid = target.grid;
    s.grid.validate();
    if (s.grid.max_len <= kH) {
        throw DomainError("max_len must exceed the record header length");
    }
    if (target.probs.size() != s.grid.bins()) {
        throw DomainError("target histogram does not match its grid");
    }
    std::mt19937_64 rng(derive_seed(seed, flow.flow_id));
    s.stay_order.resize(s.grid.bins());
    for (const Packet& p : flow.packets) {
        const std::uint32_t len = p.payload_len();
        if (len == 0) continue;
        if (len > std::numeric_limits<std::uint16_t>::max()) {
            throw DomainError("payload of packet " + std::to_string(p.seq) + " exceeds 65535 bytes");
        }
        Item it;
        it.seq = p.seq;
        it.dir = p.direction;
        it.len = len;
        it.framed = len + kH;
        it.sbin = s.grid.bin_of(it.framed);
        it.stayable = it.framed <= s.grid.max_len;
        const std::size_t idx = s.items.size();
        s.items.push_back(it);
        if (it.stayable) {
            s.stay_order[it.sbin].push_back(idx);
        } else {
            s.forced.push_back(idx);
        }
    }
    if (s.items.empty()) {
        throw DomainError("flow '" + flow.flow_id + "' has no packets with payload");
    }
    for (auto& bucket : s.stay_order) {
        std::shuffle(bucket.begin(), bucket.end(), rng);
    }
    return s;
}

/// Largest-remainder rounding of n * t; ties go to the lower bin.
std::vector<std::size_t> quotas(std::span<const double> t, std::size_t n) {
    std::vector<std::size_t> q(t.size());
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < t.size(); ++j) {
        const double exact = t[j] * static_cast<double>(n);
        q[j] = static_cast<std::size_t>(std::floor(exact));
        assigned += q[j];
        rem.push_back({exact - static_cast<double>(q[j]), j});
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < n && k < rem.size(); ++k, ++assigned) {
        ++q[rem[k].second];
    }
    return q;
}

Output single(const Setup& s, std::size_t idx) {
    const Item& it = s.items[idx];
    return Output{it.dir, false, it.sbin, it.framed, {Piece{idx, 0, it.len}}};
}

/// Splits an oversized item into max_len chunks, unpadded.
void chop(const Setup& s, std::size_t idx, std::vector<Output>& out) {
    const Item& it = s.items[idx];
    const std::uint32_t chunk = s.grid.max_len - kH;
    for (std::uint32_t off = 0; off < it.len; off += chunk) {
        const std::uint32_t len = std::min(chunk, it.len - off);
        out.push_back(Output{it.dir, false, s.grid.bin_of(len + kH), len + kH, {Piece{idx, off, len}}});
    }
}

/// Packs one direction's pieces into its slots (ascending bin tops).
bool fill_direction(const Setup& s, std::vector<std::size_t> pieces_items, const std::vector<std::size_t>& slots,
                    Direction dir, std::vector<Output>& out) {
    std::sort(pieces_items.begin(), pieces_items.end(), [&](std::size_t a, std::size_t b) {
        const Item& x = s.items[a];
        const Item& y = s.items[b];
        return x.framed != y.framed ? x.framed < y.framed : x.seq < y.seq;
    });
    std::vector<Piece> pieces;
    std::uint64_t need = 0;
    for (std::size_t idx : pieces_items) {
        pieces.push_back(Piece{idx, 0, s.items[idx].len});
        need += s.items[idx].framed;
    }
    std::uint64_t cap_left = 0;
    for (std::size_t bin : slots) cap_left += s.grid.top(bin);

    std::size_t next = 0;
    for (std::size_t k = 0; k < slots.size(); ++k) {
        const std::uint32_t cap = s.grid.top(slots[k]);
        const std::uint64_t later = slots.size() - k - 1;
        if (need < later * (kH + 1)) return false;
        const std::uint64_t limit = std::min<std::uint64_t>(cap, need - later * (kH + 1));
        const double want = static_cast<double>(need) * cap / static_cast<double>(cap_left);
        Output o{dir, true, slots[k], 0, {}};
        while (next < pieces.size()) {
            Piece& p = pieces[next];
            const std::uint64_t framed = std::uint64_t{p.len} + kH;
            if (o.content > 0 && o.content >= want) break;
            if (o.content + framed <= limit) {
                o.records.push_back(p);
                o.content += static_cast<std::uint32_t>(framed);
                need -= framed;
                ++next;
                continue;
            }
            const std::uint64_t room = limit > o.content ? limit - o.content : 0;
            if (room >= kH + 1) {
                const auto take = static_cast<std::uint32_t>(room - kH);
                o.records.push_back(Piece{p.item, p.offset, take});
                o.content += static_cast<std::uint32_t>(room);
                p.offset += take;
                p.len -= take;
                need -= take;
            }
            break;
        }
        cap_left -= cap;
        if (o.records.empty()) return false;
        out.push_back(std::move(o));
    }
    return next == pieces.size();
}

std::uint32_t output_len(const LengthGrid& grid, const Output& o) {
    return o.padded ? grid.top(o.bin) : o.content;
}

std::vector<MutationAction> to_actions(const Setup& s, std::vector<Output> outputs) {
    // order on the wire: by the earliest source packet, then that packet's offset
    auto key = [&](const Output& o) {
        std::pair<std::uint32_t, std::uint32_t> best{std::numeric_limits<std::uint32_t>::max(), 0};
        for (const Piece& p : o.records) {
            best = std::min(best, {s.items[p.item].seq, p.offset});
        }
        return best;
    };
    std::vector<std::pair<std::pair<std::uint32_t, std::uint32_t>, std::size_t>> order;
    for (std::size_t i = 0; i < outputs.size(); ++i) order.push_back({key(outputs[i]), i});
    std::sort(order.begin(), order.end());

    std::vector<MutationAction> actions;
    std::uint32_t gid = 0;
    for (const auto& [k, i] : order) {
        const Output& o = outputs[i];
        const std::uint32_t target_len = output_len(s.grid, o);
        for (const Piece& p : o.records) {
            const Item& it = s.items[p.item];
            MutationAction a;
            a.packet_seq = it.seq;
            a.direction = it.dir;
            a.source_len = it.len;
            a.fragment_offset = p.offset;
            a.length = p.len;
            a.target_len = target_len;
            a.group_id = gid;
            if (p.len < it.len) {
                a.kind = ActionKind::fragment;
            } else if (o.records.size() > 1) {
                a.kind = ActionKind::stack_member;
            } else if (target_len > it.framed) {
                a.kind = ActionKind::pad;
            } else {
                a.kind = ActionKind::keep;
            }
            actions.push_back(a);
        }
        ++gid;
    }
    return actions;
}

LengthHistogram framed_histogram(const Setup& s) {
    std::vector<std::uint32_t> framed;
    for (const Item& it : s.items) framed.push_back(it.framed);
    return *histogram_of_lengths(framed, s.grid);
}

MutationPlan assemble(const Flow& flow, const TargetHistogram& target, const Setup& s,
                      std::vector<Output> outputs) {
    MutationPlan plan;
    plan.flow_id = flow.flow_id;
    plan.grid = s.grid;
    plan.actions = to_actions(s, std::move(outputs));
    plan.src_hist = framed_histogram(s);
    plan.tgt_hist = target;
    plan.gap = per_bin_gap(plan.src_hist, target);
    plan.cost = plan_cost(plan);
    return plan;
}

Candidate score(const Setup& s, const TargetHistogram& target, std::vector<Output> outputs) {
    Candidate c;
    std::vector<double> counts(s.grid.bins(), 0.0);
    for (const Output& o : outputs) {
        const std::uint32_t len = output_len(s.grid, o);
        counts[s.grid.bin_of(len)] += 1.0;
        c.bytes += len;
    }
    for (double& v : counts) v /= static_cast<double>(outputs.size());
    c.tv = total_variation(counts, target.probs);
    c.n_out = outputs.size();

    MutationPlan tmp;
    tmp.grid = s.grid;
    tmp.actions = to_actions(s, outputs);
    c.cost = plan_cost(tmp);
    c.outputs = std::move(outputs);
    return c;
}

std::vector<Output> identity_outputs(const Setup& s) {
    std::vector<Output> out;
    for (std::size_t i = 0; i < s.items.size(); ++i) {
        if (s.items[i].stayable) {
            out.push_back(single(s, i));
        } else {
            chop(s, i, out);
        }
    }
    return out;
}

/// Tries to realize N mutated packets with bin counts from the quotas.
std::optional<std::vector<Output>> try_count(const Setup& s, const std::vector<std::size_t>& q) {
    const std::size_t bins = s.grid.bins();
    std::vector<Output> out;
    std::vector<std::size_t> surplus = s.forced;
    std::vector<std::size_t> slots;
    for (std::size_t j = 0; j < bins; ++j) {
        const auto& order = s.stay_order[j];
        const std::size_t stays = std::min(order.size(), q[j]);
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (k < stays) {
                out.push_back(single(s, order[k]));
            } else {
                surplus.push_back(order[k]);
            }
        }
        slots.insert(slots.end(), q[j] - stays, j);
    }
    if (slots.empty() && surplus.empty()) return out;
    if (slots.empty() || surplus.empty()) return std::nullopt;

    std::uint64_t need_total = 0, payload_total = 0, cap_total = 0;
    std::array<std::uint64_t, 2> need{0, 0};
    std::array<std::vector<std::size_t>, 2> by_dir;
    for (std::size_t idx : surplus) {
        const Item& it = s.items[idx];
        need_total += it.framed;
        payload_total += it.len;
        need[static_cast<std::size_t>(it.dir)] += it.framed;
        by_dir[static_cast<std::size_t>(it.dir)].push_back(idx);
    }
    for (std::size_t j : slots) cap_total += s.grid.top(j);
    if (cap_total < need_total || payload_total < slots.size()) return std::nullopt;

    // share slots so that each direction's capacity tracks its byte need
    std::array<std::vector<std::size_t>, 2> dir_slots;
    std::array<std::uint64_t, 2> cap{0, 0};
    for (std::size_t j : slots) {
        std::size_t pick = 0;
        if (need[0] == 0) {
            pick = 1;
        } else if (need[1] > 0) {
            const double r0 = static_cast<double>(cap[0]) / static_cast<double>(need[0]);
            const double r1 = static_cast<double>(cap[1]) / static_cast<double>(need[1]);
            pick = r1 < r0 ? 1 : 0;
        }
        dir_slots[pick].push_back(j);
        cap[pick] += s.grid.top(j);
    }
    for (std::size_t d = 0; d < 2; ++d) {
        if (by_dir[d].empty()) continue;
        if (dir_slots[d].empty() || cap[d] < need[d]) return std::nullopt;
        if (!fill_direction(s, by_dir[d], dir_slots[d], static_cast<Direction>(d), out)) {
            return std::nullopt;
        }
    }
    return out;
}

/// Per-byte transport price of moving part of an item into a bin.
double byte_price(const Setup& s, std::size_t item, std::size_t bin) {
    const Item& it = s.items[item];
    return std::abs(s.grid.center(bin) - s.grid.center(it.sbin)) / static_cast<double>(it.len);
}

/// Realizes the quotas as a byte transport: stays first, then every remaining
/// byte goes to the cheapest slot with room, then empty slots borrow one byte.
/// Open slots take the direction of the first record placed in them, unless
/// `upstream_open` fixes how many open slots per bin go upstream.
std::optional<std::vector<Output>> transport_count(const Setup& s, const std::vector<std::size_t>& q,
                                                   const std::vector<std::size_t>* upstream_open = nullptr) {
    struct Slot {
        std::size_t bin = 0;
        int dir = -1;
        std::optional<std::size_t> stay;
        std::uint32_t content = 0;
        std::map<std::size_t, std::uint32_t> amount;  // item -> payload bytes
    };
    std::vector<Slot> slots;
    std::vector<std::size_t> surplus = s.forced;
    for (std::size_t j = 0; j < s.grid.bins(); ++j) {
        const auto& order = s.stay_order[j];
        const std::size_t stays = std::min(order.size(), q[j]);
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (k >= stays) {
                surplus.push_back(order[k]);
                continue;
            }
            const Item& it = s.items[order[k]];
            slots.push_back(Slot{j, static_cast<int>(it.dir), order[k], it.framed, {{order[k], it.len}}});
        }
        for (std::size_t k = stays; k < q[j]; ++k) {
            int dir = -1;
            if (upstream_open) dir = k - stays < (*upstream_open)[j] ? 0 : 1;
            slots.push_back(Slot{j, dir, std::nullopt, 0, {}});
        }
    }

    std::map<std::size_t, std::uint32_t> left;
    // bytes (one header per item) still to place, and room in slots already
    // holding that direction, per direction; room in open slots
    std::array<std::int64_t, 2> pending{0, 0}, dir_room{0, 0};
    std::int64_t open_room = 0;
    for (std::size_t item : surplus) {
        left[item] = s.items[item].len;
        pending[static_cast<std::size_t>(s.items[item].dir)] += s.items[item].framed;
    }
    for (const Slot& slot : slots) {
        const std::int64_t top = s.grid.top(slot.bin);
        if (slot.dir == -1) {
            open_room += top;
        } else {
            dir_room[static_cast<std::size_t>(slot.dir)] += top - slot.content;
        }
    }

    std::vector<std::vector<std::size_t>> by_bin(s.grid.bins());
    // topping up a stay costs its padding, so open slots are filled first
    for (std::size_t k = 0; k < slots.size(); ++k) {
        if (!slots[k].stay) by_bin[slots[k].bin].push_back(k);
    }
    for (std::size_t k = 0; k < slots.size(); ++k) {
        if (slots[k].stay) by_bin[slots[k].bin].push_back(k);
    }
    struct Pair {
        double price;
        std::size_t bin;
        std::size_t item;
    };
    std::vector<Pair> pairs;
    for (std::size_t item : surplus) {
        for (std::size_t j = 0; j < by_bin.size(); ++j) {
            if (!by_bin[j].empty()) pairs.push_back({byte_price(s, item, j), j, item});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.price < b.price; });
    for (const Pair& pr : pairs) {
        std::uint32_t& rem = left[pr.item];
        const int dir = static_cast<int>(s.items[pr.item].dir);
        const std::uint32_t top = s.grid.top(pr.bin);
        for (std::size_t k : by_bin[pr.bin]) {
            if (rem == 0) break;
            Slot& slot = slots[k];
            if (slot.dir == -1) {
                // keep enough open room for the other direction
                const auto other = static_cast<std::size_t>(1 - dir);
                if (dir_room[other] + open_room - top < pending[other]) continue;
                slot.dir = dir;
                open_room -= top;
                dir_room[static_cast<std::size_t>(dir)] += top;
            } else if (slot.dir != dir) {
                continue;
            }
            const std::uint32_t header = slot.amount.count(pr.item) == 0 ? kH : 0;
            if (slot.content + header >= top) continue;
            const std::uint32_t take = std::min(rem, top - slot.content - header);
            slot.amount[pr.item] += take;
            slot.content += take + header;
            rem -= take;
            dir_room[static_cast<std::size_t>(dir)] -= take + header;
            pending[static_cast<std::size_t>(dir)] -= take + (rem == 0 ? kH : 0);
        }
    }
    for (const auto& [item, rem] : left) {
        if (rem > 0) return std::nullopt;
    }

    // empty slots borrow one byte from the record that is cheapest to shift
    for (std::size_t bin = 0; bin < by_bin.size(); ++bin) {
        std::vector<std::size_t> empty;
        for (std::size_t k : by_bin[bin]) {
            if (slots[k].amount.empty()) empty.push_back(k);
        }
        if (empty.empty()) continue;
        struct Donor {
            double delta;
            std::size_t slot;
            std::size_t item;
        };
        std::vector<Donor> donors;
        for (std::size_t d = 0; d < slots.size(); ++d) {
            for (const auto& [item, amt] : slots[d].amount) {
                if (amt >= 2) donors.push_back({byte_price(s, item, bin) - byte_price(s, item, slots[d].bin), d, item});
            }
        }
        std::stable_sort(donors.begin(), donors.end(), [](const Donor& a, const Donor& b) { return a.delta < b.delta; });
        for (std::size_t k : empty) {
            const auto it = std::find_if(donors.begin(), donors.end(), [&](const Donor& d) {
                return slots[d.slot].amount.at(d.item) >= 2 && d.slot != k &&
                       (slots[k].dir == -1 || slots[d.slot].dir == slots[k].dir);
            });
            if (it == donors.end()) return std::nullopt;
            Slot& from = slots[it->slot];
            from.amount[it->item] -= 1;
            from.content -= 1;
            slots[k].dir = from.dir;
            slots[k].amount[it->item] = 1;
            slots[k].content = kH + 1;
        }
    }

    std::vector<Output> out;
    std::vector<std::uint32_t> offset(s.items.size(), 0);
    for (const Slot& slot : slots) {
        Output o{static_cast<Direction>(slot.dir), true, slot.bin, slot.content, {}};
        for (const auto& [item, amt] : slot.amount) {
            o.records.push_back(Piece{item, offset[item], amt});
            offset[item] += amt;
        }
        // a lone whole packet already in its own bin goes out as it is
        if (o.records.size() == 1 && o.records[0].len == s.items[o.records[0].item].len &&
            s.items[o.records[0].item].sbin == slot.bin) {
            o.padded = false;
        }
        out.push_back(std::move(o));
    }
    return out;
}

/// Every packet (or max_len chunk of an oversized one) draws a destination
/// bin from the target and is padded up to it; draws at or below its own bin
/// leave it as it is.
std::vector<Output> pad_only_outputs(const Setup& s, const Flow& flow, const TargetHistogram& target,
                                     std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(derive_seed(seed, flow.flow_id), std::string_view("pad-only")));
    std::discrete_distribution<std::size_t> draw(target.probs.begin(), target.probs.end());
    std::vector<Output> pieces;
    for (std::size_t i = 0; i < s.items.size(); ++i) {
        if (s.items[i].stayable) {
            pieces.push_back(single(s, i));
        } else {
            chop(s, i, pieces);
        }
    }
    for (Output& o : pieces) {
        const std::size_t dest = draw(rng);
        if (dest > o.bin) {
            o.bin = dest;
            o.padded = true;
        }
    }
    return pieces;
}

}  // namespace

std::vector<double> per_bin_gap(const LengthHistogram& src, const TargetHistogram& tgt) {
    if (!(src.grid == tgt.grid) || src.probs.size() != tgt.probs.size()) {
        throw DomainError("source and target histograms use different grids");
    }
    std::vector<double> gap(src.probs.size());
    for (std::size_t i = 0; i < gap.size(); ++i) {
        gap[i] = tgt.probs[i] - src.probs[i];
    }
    return gap;
}

double plan_cost(const MutationPlan& plan) {
    const LengthGrid& grid = plan.grid;
    std::map<std::uint32_t, std::uint32_t> sources;
    for (const MutationAction& a : plan.actions) sources.emplace(a.packet_seq, a.source_len);
    if (sources.empty()) return 0.0;
    double total = 0.0;
    for (const MutationAction& a : plan.actions) {
        if (a.source_len == 0) continue;
        const double share = double(a.length) / double(a.source_len);
        const double src = grid.center(grid.bin_of(a.source_len + kH));
        const double dest = grid.center(grid.bin_of(a.target_len));
        total += share * std::abs(dest - src);
    }
    return total / static_cast<double>(sources.size());
}

MutationPlan plan_mutation(const Flow& flow, const TargetHistogram& target, std::uint64_t seed) {
    const Setup s = prepare(flow, target, seed);

    std::vector<Candidate> candidates;
    candidates.push_back(score(s, target, identity_outputs(s)));
    const double cost_cap = score(s, target, pad_only_outputs(s, flow, target, seed)).cost;

    std::uint64_t payload_total = 0;
    for (const Item& it : s.items) payload_total += it.len;
    // beyond this many packets some slot would be left without a payload byte
    const std::uint64_t n_limit = std::min<std::uint64_t>(payload_total, 64 * s.items.size() + 64);

    const bool two_way = std::any_of(s.items.begin(), s.items.end(), [](const Item& it) { return it.dir == Direction::upstream; }) &&
                         std::any_of(s.items.begin(), s.items.end(), [](const Item& it) { return it.dir == Direction::downstream; });
    auto attempt = [&](const Setup& s, std::uint64_t n) {
        const auto q = quotas(target.probs, n);
        // cheap capacity screen before trying to pack
        std::uint64_t need = 0, cap = 0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            const auto& order = s.stay_order[j];
            const std::size_t stays = std::min(order.size(), q[j]);
            for (std::size_t k = stays; k < order.size(); ++k) need += s.items[order[k]].framed;
            cap += std::uint64_t{q[j] - stays} * s.grid.top(j);
        }
        for (std::size_t idx : s.forced) need += s.items[idx].framed;
        if (cap < need) return false;
        auto outputs = transport_count(s, q);
        if (!outputs) outputs = try_count(s, q);
        if (outputs) candidates.push_back(score(s, target, std::move(*outputs)));

        // few open slots and both directions present: try every direction split
        if (!two_way) return true;
        std::vector<std::size_t> open(q.size());
        std::size_t splits = 1;
        for (std::size_t j = 0; j < q.size(); ++j) {
            open[j] = q[j] - std::min(s.stay_order[j].size(), q[j]);
            splits *= open[j] + 1;
            if (splits > kSplitLimit) return true;
        }
        std::vector<std::size_t> up(q.size(), 0);
        for (std::size_t k = 0; k < splits; ++k) {
            if (auto fixed = transport_count(s, q, &up)) candidates.push_back(score(s, target, std::move(*fixed)));
            for (std::size_t j = 0; j < up.size(); ++j) {
                if (++up[j] <= open[j]) break;
                up[j] = 0;
            }
        }
        return true;
    };

    // which packets keep their place matters on small flows; rotate each bin's stay order
    std::vector<Setup> variants = {s};
    if (s.items.size() <= kRotateItems) {
        for (std::size_t r = 1; r < kRotations; ++r) {
            Setup v = s;
            bool changed = false;
            for (auto& bucket : v.stay_order) {
                if (bucket.size() < 2) continue;
                std::rotate(bucket.begin(), bucket.begin() + static_cast<std::ptrdiff_t>(r % bucket.size()), bucket.end());
                changed = changed || r % bucket.size() != 0;
            }
            if (changed) variants.push_back(std::move(v));
        }
    }
    const std::uint64_t home = candidates.front().n_out;
    for (const Setup& v : variants) {
        std::set<std::uint64_t> tried;
        std::size_t attempts = 0;
        for (std::uint64_t n = 1; n <= n_limit && attempts < kFillAttempts; ++n) {
            tried.insert(n);
            attempts += attempt(v, n);
        }
        // packet counts close to the flow's own
        for (std::uint64_t n = home > kHomeWindow ? home - kHomeWindow : 1; n <= home + kHomeWindow && n <= n_limit; ++n) {
            if (tried.insert(n).second) attempt(v, n);
        }
    }

    // near-best fit first, then fewest bytes, then lowest transport cost
    double best_tv = std::numeric_limits<double>::infinity();
    for (const Candidate& c : candidates) best_tv = std::min(best_tv, c.tv);
    // prefer plans that move no more mass than padding alone
    const bool capped = std::any_of(candidates.begin(), candidates.end(), [&](const Candidate& c) {
        return c.tv <= best_tv + kTvSlack && c.cost <= cost_cap;
    });
    auto eligible = [&](const Candidate& c) {
        return c.tv <= best_tv + kTvSlack && !(capped && c.cost > cost_cap);
    };
    // lowest cost among plans within a small margin of the fewest bytes
    std::uint64_t least_bytes = std::numeric_limits<std::uint64_t>::max();
    for (const Candidate& c : candidates) {
        if (eligible(c)) least_bytes = std::min(least_bytes, c.bytes);
    }
    const double byte_budget = static_cast<double>(least_bytes) * (1.0 + kByteSlack);
    const Candidate* chosen = nullptr;
    for (const Candidate& c : candidates) {
        if (!eligible(c) || static_cast<double>(c.bytes) > byte_budget) continue;
        if (chosen == nullptr || c.cost < chosen->cost ||
            (c.cost == chosen->cost && (c.bytes < chosen->bytes ||
                                        (c.bytes == chosen->bytes && c.n_out < chosen->n_out)))) {
            chosen = &c;
        }
    }
    return assemble(flow, target, s, chosen->outputs);
}

MutationPlan plan_pad_only(const Flow& flow, const TargetHistogram& target, std::uint64_t seed) {
    const Setup s = prepare(flow, target, seed);
    return assemble(flow, target, s, pad_only_outputs(s, flow, target, seed));
}

}  // namespace skewmorph
