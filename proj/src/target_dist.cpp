#include "skewmorph/target_dist.hpp"

#include "skewmorph/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace skewmorph {
namespace {

// 16-point Gauss-Legendre rule on [-1, 1], positive half (the rule is symmetric).
constexpr std::array<double, 8> kGaussNodes = {
    0.0950125098376374401853193, 0.2816035507792589132304605, 0.4580167776572273863424194,
    0.6178762444026437484466718, 0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
constexpr std::array<double, 8> kGaussWeights = {
    0.1894506104550684962853967, 0.1826034150449235888667637, 0.1691565193950025381893121,
    0.1495959888165767320815017, 0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

template <class F>
double gauss_legendre_16(F&& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
        const double dx = half * kGaussNodes[i];
        sum += kGaussWeights[i] * (f(mid - dx) + f(mid + dx));
    }
    return sum * half;
}

constexpr int kMaxPanelsPerBin = 4096;

}  // namespace

void SkewNormalParams::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError("skew-normal scale must be positive");
    }
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw DomainError("skew-normal location must be positive");
    }
    if (!std::isfinite(alpha)) {
        throw DomainError("skew-normal shape must be finite");
    }
}

double normal_pdf(double x, double mu, double sigma) {
    if (!(sigma > 0.0)) {
        throw DomainError("normal_pdf: sigma must be positive");
    }
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double skew_normal_pdf(double x, const SkewNormalParams& params) {
    if (!(params.sigma > 0.0)) {
        throw DomainError("skew_normal_pdf: sigma must be positive");
    }
    const double z = (x - params.mu) / params.sigma;
    return 2.0 * normal_pdf(x, params.mu, params.sigma) * normal_cdf(params.alpha * z);
}

double schedule_alpha(std::int64_t t) {
    if (t < 0) {
        throw DomainError("schedule_alpha: time must be non-negative");
    }
    const double magnitude = static_cast<double>(t % 60);
    return (t % 2 == 0) ? magnitude : -magnitude;
}

double derive_mu(const Flow& flow) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const Packet& p : flow.packets) {
        if (p.payload_len() > 0) {
            sum += p.payload_len();
            ++count;
        }
    }
    if (count == 0) {
        throw DomainError("flow '" + flow.flow_id + "' has no packets with payload");
    }
    return sum / static_cast<double>(count);
}

double derive_sigma(double mu) {
    if (!(mu > 0.0)) {
        throw DomainError("derive_sigma: mu must be positive");
    }
    return mu / 3.0;
}

TargetHistogram discretize(const SkewNormalParams& params, const LengthGrid& grid,
                           const QuadratureOptions& quadrature) {
    params.validate();
    grid.validate();
    if (quadrature.refine < 1) {
        throw DomainError("quadrature refinement must be at least 1");
    }

    // Panels narrow enough to resolve the Phi(alpha z) edge, whose width is ~sigma/|alpha|.
    const double panel = params.sigma / (2.0 * (1.0 + std::abs(params.alpha)));
    const double support_lo = params.mu - 40.0 * params.sigma;
    const double support_hi = params.mu + 40.0 * params.sigma;
    auto density = [&](double x) { return skew_normal_pdf(x, params); };

    TargetHistogram out;
    out.grid = grid;
    out.params = params;
    out.probs.assign(grid.bins(), 0.0);

    double total = 0.0;
    for (std::size_t i = 0; i < grid.bins(); ++i) {
        const double lo = i == 0 ? 1.0 : static_cast<double>(grid.floor(i));
        const double hi = static_cast<double>(grid.top(i));
        if (hi <= lo) {
            continue;
        }
        int panels = 1;
        if (hi > support_lo && lo < support_hi) {
            const double wanted = std::ceil((hi - lo) / panel);
            panels = static_cast<int>(std::clamp(wanted, 1.0, double(kMaxPanelsPerBin)));
        }
        panels *= quadrature.refine;
        const double step = (hi - lo) / panels;
        double mass = 0.0;
        for (int k = 0; k < panels; ++k) {
            const double a = lo + step * k;
            const double b = k + 1 == panels ? hi : lo + step * (k + 1);
            mass += gauss_legendre_16(density, a, b);
        }
        out.probs[i] = mass;
        total += mass;
    }

    if (!(total >= 1e-6)) {
        throw DegenerateTargetError("target mass inside [1, max_len] is below 1e-6");
    }
    for (double& p : out.probs) {
        p /= total;
    }
    return out;
}

std::int64_t flow_clock(const Flow& flow, std::int64_t fallback_clock) {
    if (flow.start_time) {
        return static_cast<std::int64_t>(std::floor(*flow.start_time));
    }
    return fallback_clock;
}

TargetHistogram flow_target(const Flow& flow, double alpha, const LengthGrid& grid,
                            std::int64_t timestamp) {
    SkewNormalParams params;
    params.mu = derive_mu(flow);
    params.sigma = derive_sigma(params.mu);
    params.alpha = alpha;
    TargetHistogram target = discretize(params, grid);
    target.timestamp = timestamp;
    return target;
}

}  // namespace skewmorph
