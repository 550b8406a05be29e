#pragma once

#include <cstdint>
#include <random>

namespace cyborg {

/// Seeded random source shared by every module of one simulation run.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the
/// standard. All derived variates (uniform, normal, von Mises, ...) are
/// computed here rather than through <random> distributions, whose
/// algorithms are implementation-defined, so traces are bit-identical
/// across standard libraries for the same seed and call sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log() argument.
    double uniform_open0() { return 1.0 - uniform(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via the Marsaglia polar method (one cached spare).
    double normal();

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Normal sample clamped below at `floor`.
    double normal_clamped(double mean, double sd, double floor) {
        const double x = normal(mean, sd);
        return x < floor ? floor : x;
    }

    /// Von Mises variate in radians on (-pi, pi], Best-Fisher rejection.
    double von_mises(double mu, double kappa);

    /// Log-normal: exp(N(log_mean, log_sd)).
    double lognormal(double log_mean, double log_sd);

    /// Independent child stream, e.g. one per trial or per sensor.
    Rng split() { return Rng(engine_() ^ 0x9E3779B97F4A7C15ULL); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cyborg
