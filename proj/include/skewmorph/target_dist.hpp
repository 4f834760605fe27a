#pragma once

#include "skewmorph/trace_model.hpp"

#include <cstdint>
#include <vector>

namespace skewmorph {

/// Location / scale / shape of a skew-normal length distribution, in bytes.
struct SkewNormalParams {
    double mu = 0.0;
    double sigma = 1.0;
    double alpha = 0.0;

    /// Throws DomainError unless sigma > 0 and mu > 0.
    void validate() const;
};

struct TargetHistogram {
    LengthGrid grid;
    std::vector<double> probs;
    SkewNormalParams params;
    std::int64_t timestamp = 0;
};

double normal_pdf(double x, double mu, double sigma);

/// Standard normal CDF over (-inf, z].
double normal_cdf(double z);

/// (2/sigma) * phi(z) * Phi(alpha * z), z = (x - mu) / sigma.
double skew_normal_pdf(double x, const SkewNormalParams& params);

/// Shape parameter for integer time t: (t mod 60) * (-1)^t.
double schedule_alpha(std::int64_t t);

/// Mean payload length over packets with a non-empty payload.
double derive_mu(const Flow& flow);

double derive_sigma(double mu);

struct QuadratureOptions {
    /// Multiplies the number of Gauss-Legendre panels per bin.
    int refine = 1;
};

/// Per-bin probability mass of the skew-normal over [1, max_len], renormalized.
/// Throws DegenerateTargetError when less than 1e-6 of the mass falls in range.
TargetHistogram discretize(const SkewNormalParams& params, const LengthGrid& grid,
                           const QuadratureOptions& quadrature = {});

/// Time used by schedule_alpha for a flow: floor of its absolute start time,
/// or `fallback_clock` when the flow has none.
std::int64_t flow_clock(const Flow& flow, std::int64_t fallback_clock);

/// Target for one flow: mu from its lengths, sigma = mu / 3, the given alpha.
TargetHistogram flow_target(const Flow& flow, double alpha, const LengthGrid& grid,
                            std::int64_t timestamp = 0);

}  // namespace skewmorph
