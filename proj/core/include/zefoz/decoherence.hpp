#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace zefoz {

enum class DecayKind { exponential, mims_quadratic, biexponential };

std::string_view to_string(DecayKind k) noexcept;
/// "exponential", "mims_quadratic" (or "quadratic"), "biexponential".
DecayKind parse_decay_kind(std::string_view text);
int parameter_count(DecayKind k) noexcept;

/// Echo decay envelope. Time arguments are the total two-pulse delay 2t
/// for the exponential and quadratic models and tau_2 at fixed tau_1 for
/// the biexponential three-pulse model; seconds throughout.
///
///   exponential     params = (I0, T2)          I0 exp(-x/T2)
///   mims_quadratic  params = (I0, TM)          I0 exp(-(x/TM)^2)
///   biexponential   params = (Af, tf, As, ts)  Af exp(-x/tf) + As exp(-x/ts)
struct DecayModel {
    DecayKind kind = DecayKind::exponential;
    std::array<double, 4> params{};

    static DecayModel exponential(double i0, double t2);
    static DecayModel mims_quadratic(double i0, double tm);
    static DecayModel biexponential(double fast_amplitude, double fast_tau, double slow_amplitude, double slow_tau);

    /// Throws Error(parameter) if amplitudes or time constants are not
    /// positive, or tf >= ts.
    void validate() const;
};

/// Throws Error(domain) for negative t.
double evaluate(const DecayModel& model, double t);

/// Phase memory time from a linear spectral-diffusion rate (Hz/s):
/// TM = (pi R)^(-1/2). Throws Error(domain) for R <= 0.
double tm_from_rate(double rate_hz_per_s);
double rate_from_tm(double tm_seconds);

struct DecayPoint {
    double t = 0.0;
    double intensity = 0.0;
};

struct FitOptions {
    int max_evaluations = 4000;
    double tolerance = 1.0e-12;  // relative spread of the simplex objective
    int starts = 9;              // log-spaced starting time constants
};

struct FitResult {
    DecayModel model;
    double residual_rms = 0.0;
    std::array<double, 4> covariance_diag{};
    bool converged = false;
    int iterations = 0;
};

/// Least-squares fit by Nelder-Mead over log time constants, with
/// amplitudes solved linearly at each step and a deterministic log-spaced
/// multi-start. Requires at least 2 * parameter_count points with strictly
/// increasing, nonnegative t (Error(parameter) otherwise).
FitResult fit(const std::vector<DecayPoint>& data, DecayKind kind, const FitOptions& opts = {});

/// evaluate() at each time times (1 + noise_fraction * N(0,1)), drawn from
/// a mt19937_64 seeded with `seed`.
std::vector<DecayPoint> generate(const DecayModel& model, const std::vector<double>& times, double noise_fraction,
                                 std::uint64_t seed);

/// n points evenly spaced on [t0, t1].
std::vector<double> linear_times(double t0, double t1, int n);
/// n points log-spaced on [t0, t1], t0 > 0.
std::vector<double> log_times(double t0, double t1, int n);

}  // namespace zefoz
