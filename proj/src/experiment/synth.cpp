#include "skewmorph/errors.hpp"
#include "skewmorph/experiment.hpp"
#include "skewmorph/seeding.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace skewmorph {
namespace {

constexpr int kComponents = 3;
constexpr std::uint32_t kMaxPayload = 1460;
constexpr double kAckShare = 0.05;

struct Mixture {
    std::array<double, kComponents> weight{};
    std::array<double, kComponents> center{};
    std::array<double, kComponents> spread{};
};

struct AppModel {
    double p_up = 0.5;
    std::array<Mixture, 2> length;  // per direction
};

AppModel draw_app(std::mt19937_64& rng) {
    AppModel m;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    m.p_up = 0.3 + 0.4 * unit(rng);
    for (Mixture& mix : m.length) {
        double total = 0.0;
        for (int c = 0; c < kComponents; ++c) {
            mix.weight[c] = -std::log(1.0 - unit(rng));  // Dirichlet(1, 1, 1)
            total += mix.weight[c];
            mix.center[c] = 40.0 + 1360.0 * unit(rng);
            mix.spread[c] = 8.0 + 52.0 * unit(rng);
        }
        for (double& w : mix.weight) w /= total;
    }
    return m;
}

std::uint32_t draw_length(const Mixture& mix, std::mt19937_64& rng) {
    std::discrete_distribution<int> pick(mix.weight.begin(), mix.weight.end());
    const int c = pick(rng);
    std::normal_distribution<double> len(mix.center[c], mix.spread[c]);
    const double v = std::round(len(rng));
    return static_cast<std::uint32_t>(std::clamp(v, 1.0, double(kMaxPayload)));
}

}  // namespace

std::vector<Flow> synth_corpus(int n_apps, int flows_per_app, std::uint64_t seed) {
    if (n_apps < 2) {
        throw DomainError("synthetic corpus needs at least two apps");
    }
    if (flows_per_app < 1) {
        throw DomainError("synthetic corpus needs at least one flow per app");
    }
    std::vector<Flow> flows;
    for (int a = 0; a < n_apps; ++a) {
        const std::string label = "app" + std::to_string(a);
        std::mt19937_64 app_rng(derive_seed(seed, label));
        const AppModel model = draw_app(app_rng);

        for (int k = 0; k < flows_per_app; ++k) {
            Flow f;
            f.app_label = label;
            f.flow_id = label + "-" + std::to_string(k);
            std::mt19937_64 rng(derive_seed(seed, f.flow_id));
            std::uniform_int_distribution<int> count(20, 400);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::lognormal_distribution<double> gap(-4.0, 1.5);  // same timing model for every app
            f.start_time = 1.5e9 + std::floor(1e6 * unit(rng)) + unit(rng);

            const int n = count(rng);
            double t = 0.0;
            for (int i = 0; i < n; ++i) {
                Packet p;
                p.seq = static_cast<std::uint32_t>(i);
                const double iat = i == 0 ? 0.0 : gap(rng);
                t += iat;
                p.timestamp = t;
                p.iat = iat;
                p.direction = unit(rng) < model.p_up ? Direction::upstream : Direction::downstream;
                const bool ack = unit(rng) < kAckShare;
                const std::uint32_t len = draw_length(model.length[static_cast<int>(p.direction)], rng);
                p.payload = synthetic_payload(f.flow_id, p.seq, ack ? 0 : len);
                p.src_port = static_cast<std::uint16_t>(40000 + k % 20000);
                p.dst_port = 443;
                p.tcp_win_size = 65535;
                f.packets.push_back(std::move(p));
            }
            if (std::none_of(f.packets.begin(), f.packets.end(), [](const Packet& p) { return p.payload_len() > 0; })) {
                f.packets.front().payload = synthetic_payload(f.flow_id, 0, 1);
            }
            flows.push_back(std::move(f));
        }
    }
    return flows;
}

}  // namespace skewmorph
