#include "zefoz/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "zefoz/error.hpp"

namespace zefoz {

std::string_view to_string(DecayKind k) noexcept {
    switch (k) {
        case DecayKind::exponential: return "exponential";
        case DecayKind::mims_quadratic: return "mims_quadratic";
        case DecayKind::biexponential: return "biexponential";
    }
    return "exponential";
}

DecayKind parse_decay_kind(std::string_view text) {
    if (text == "exponential" || text == "exp") return DecayKind::exponential;
    if (text == "mims_quadratic" || text == "quadratic" || text == "mims") return DecayKind::mims_quadratic;
    if (text == "biexponential" || text == "biexp") return DecayKind::biexponential;
    throw Error(ErrorKind::parameter,
                "unknown decay model '" + std::string(text) + "' (expected exponential, mims_quadratic, biexponential)");
}

int parameter_count(DecayKind k) noexcept { return k == DecayKind::biexponential ? 4 : 2; }

DecayModel DecayModel::exponential(double i0, double t2) { return {DecayKind::exponential, {i0, t2, 0.0, 0.0}}; }
DecayModel DecayModel::mims_quadratic(double i0, double tm) { return {DecayKind::mims_quadratic, {i0, tm, 0.0, 0.0}}; }
DecayModel DecayModel::biexponential(double af, double tf, double as, double ts) {
    return {DecayKind::biexponential, {af, tf, as, ts}};
}

void DecayModel::validate() const {
    for (int i = 0; i < parameter_count(kind); ++i) {
        if (!(params[static_cast<std::size_t>(i)] > 0.0) || !std::isfinite(params[static_cast<std::size_t>(i)]))
            throw Error(ErrorKind::parameter, "decay model parameters must be positive and finite");
    }
    if (kind == DecayKind::biexponential && !(params[1] < params[3]))
        throw Error(ErrorKind::parameter, "biexponential fast time constant must be below the slow one");
}

double evaluate(const DecayModel& m, double t) {
    if (!(t >= 0.0)) throw Error(ErrorKind::domain, "decay time must be nonnegative");
    const auto& p = m.params;
    switch (m.kind) {
        case DecayKind::exponential: return p[0] * std::exp(-t / p[1]);
        case DecayKind::mims_quadratic: {
            const double x = t / p[1];
            return p[0] * std::exp(-x * x);
        }
        case DecayKind::biexponential: return p[0] * std::exp(-t / p[1]) + p[2] * std::exp(-t / p[3]);
    }
    return 0.0;
}

double tm_from_rate(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw Error(ErrorKind::domain, "spectral diffusion rate must be positive");
    return 1.0 / std::sqrt(std::numbers::pi * rate);
}

double rate_from_tm(double tm) {
    if (!(tm > 0.0) || !std::isfinite(tm)) throw Error(ErrorKind::domain, "phase memory time must be positive");
    return 1.0 / (std::numbers::pi * tm * tm);
}

namespace {

using Vec = Eigen::VectorXd;

struct Simplex {
    Vec best;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2).
Simplex nelder_mead(const std::function<double(const Vec&)>& f, const Vec& start, double step, const FitOptions& opts) {
    const auto n = start.size();
    std::vector<Vec> pts(static_cast<std::size_t>(n + 1), start);
    std::vector<double> vals(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i + 1)][i] += step;
    int evals = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        vals[i] = f(pts[i]);
        ++evals;
    }
    Simplex out;
    std::vector<std::size_t> order(pts.size());
    while (true) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t lo = order.front(), hi = order.back(), nh = order[order.size() - 2];
        double diameter = 0.0;
        for (const auto& p : pts) diameter = std::max(diameter, (p - pts[lo]).cwiseAbs().maxCoeff());
        const double spread = vals[hi] - vals[lo];
        // the objective is normalised by |y|^2, so 1e-28 is its roundoff floor
        if ((spread <= opts.tolerance * std::abs(vals[lo]) || spread <= 1e-28) && diameter < 1e-9) {
            out.converged = true;
            break;
        }
        if (evals >= opts.max_evaluations) break;
        ++out.iterations;

        Vec centroid = Vec::Zero(n);
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (i != hi) centroid += pts[i];
        centroid /= static_cast<double>(n);

        const Vec reflected = centroid + (centroid - pts[hi]);
        const double fr = f(reflected);
        ++evals;
        if (fr < vals[lo]) {
            const Vec expanded = centroid + 2.0 * (centroid - pts[hi]);
            const double fe = f(expanded);
            ++evals;
            if (fe < fr) {
                pts[hi] = expanded;
                vals[hi] = fe;
            } else {
                pts[hi] = reflected;
                vals[hi] = fr;
            }
            continue;
        }
        if (fr < vals[nh]) {
            pts[hi] = reflected;
            vals[hi] = fr;
            continue;
        }
        const bool outside = fr < vals[hi];
        const Vec contracted = outside ? Vec(centroid + 0.5 * (reflected - centroid)) : Vec(centroid + 0.5 * (pts[hi] - centroid));
        const double fc = f(contracted);
        ++evals;
        if (fc < (outside ? fr : vals[hi])) {
            pts[hi] = contracted;
            vals[hi] = fc;
            continue;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == lo) continue;
            pts[i] = pts[lo] + 0.5 * (pts[i] - pts[lo]);
            vals[i] = f(pts[i]);
            ++evals;
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (vals[i] < vals[best]) best = i;
    out.best = pts[best];
    out.value = vals[best];
    return out;
}

double basis(DecayKind kind, double t, double tau) {
    if (kind == DecayKind::mims_quadratic) {
        const double x = t / tau;
        return std::exp(-x * x);
    }
    return std::exp(-t / tau);
}

// Given the time constants, the amplitudes enter linearly. Returns the
// nonnegative least-squares amplitudes and the residual sum of squares.
struct Projection {
    std::array<double, 2> amplitudes{};
    double sse = 0.0;
};

Projection project(const std::vector<DecayPoint>& data, DecayKind kind, const std::array<double, 2>& taus) {
    const int terms = kind == DecayKind::biexponential ? 2 : 1;
    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd a(n, terms);
    Vec y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = data[static_cast<std::size_t>(i)].intensity;
        for (int k = 0; k < terms; ++k) a(i, k) = basis(kind, data[static_cast<std::size_t>(i)].t, taus[static_cast<std::size_t>(k)]);
    }
    auto sse_of = [&](const Vec& c) { return (a * c - y).squaredNorm(); };
    Projection best;
    best.sse = std::numeric_limits<double>::infinity();
    auto consider = [&](const Vec& c) {
        if ((c.array() < 0.0).any() || !c.allFinite()) return;
        const double s = sse_of(c);
        if (s < best.sse) {
            best.sse = s;
            for (int k = 0; k < terms; ++k) best.amplitudes[static_cast<std::size_t>(k)] = c[k];
        }
    };
    consider(a.colPivHouseholderQr().solve(y));
    if (terms == 2) {
        // active-set fallbacks with one amplitude pinned at zero
        for (int k = 0; k < 2; ++k) {
            const double denom = a.col(k).squaredNorm();
            Vec c = Vec::Zero(2);
            if (denom > 0.0) c[k] = std::max(0.0, a.col(k).dot(y) / denom);
            consider(c);
        }
    }
    if (!std::isfinite(best.sse)) {
        best.sse = y.squaredNorm();
        best.amplitudes = {0.0, 0.0};
    }
    return best;
}

DecayModel assemble(DecayKind kind, const Projection& p, const std::array<double, 2>& taus) {
    if (kind != DecayKind::biexponential) return DecayModel{kind, {p.amplitudes[0], taus[0], 0.0, 0.0}};
    if (taus[0] <= taus[1]) return DecayModel::biexponential(p.amplitudes[0], taus[0], p.amplitudes[1], taus[1]);
    return DecayModel::biexponential(p.amplitudes[1], taus[1], p.amplitudes[0], taus[0]);
}

std::array<double, 4> covariance_diagonal(const std::vector<DecayPoint>& data, const DecayModel& model, double sse) {
    const int np = parameter_count(model.kind);
    const auto n = static_cast<Eigen::Index>(data.size());
    std::array<double, 4> out{};
    if (n <= np) return out;
    Eigen::MatrixXd jac(n, np);
    for (int k = 0; k < np; ++k) {
        const double p = model.params[static_cast<std::size_t>(k)];
        const double h = 1e-6 * std::max(std::abs(p), 1e-300);
        DecayModel up = model, down = model;
        up.params[static_cast<std::size_t>(k)] = p + h;
        down.params[static_cast<std::size_t>(k)] = std::max(p - h, 0.5 * p);
        const double dh = up.params[static_cast<std::size_t>(k)] - down.params[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < n; ++i) {
            const double t = data[static_cast<std::size_t>(i)].t;
            jac(i, k) = (evaluate(up, t) - evaluate(down, t)) / dh;
        }
    }
    const double s2 = sse / static_cast<double>(n - np);
    const Eigen::MatrixXd info = jac.transpose() * jac;
    const Eigen::MatrixXd cov = info.completeOrthogonalDecomposition().pseudoInverse() * s2;
    for (int k = 0; k < np; ++k) out[static_cast<std::size_t>(k)] = cov(k, k);
    return out;
}

void check_data(const std::vector<DecayPoint>& data, DecayKind kind) {
    const auto need = static_cast<std::size_t>(2 * parameter_count(kind));
    if (data.size() < need) {
        throw Error(ErrorKind::parameter, "fit of a " + std::string(to_string(kind)) + " model needs at least " +
                                              std::to_string(need) + " points (got " + std::to_string(data.size()) + ")");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i].t) || !std::isfinite(data[i].intensity) || data[i].t < 0.0)
            throw Error(ErrorKind::parameter, "decay data must be finite with nonnegative times");
        if (i > 0 && !(data[i].t > data[i - 1].t))
            throw Error(ErrorKind::parameter, "decay data times must be strictly increasing");
    }
}

}  // namespace

FitResult fit(const std::vector<DecayPoint>& data, DecayKind kind, const FitOptions& opts) {
    check_data(data, kind);
    double norm2 = 0.0;
    for (const auto& d : data) norm2 += d.intensity * d.intensity;
    if (!(norm2 > 0.0)) throw Error(ErrorKind::parameter, "decay data are identically zero");

    const int terms = kind == DecayKind::biexponential ? 2 : 1;
    auto taus_of = [&](const Vec& x) {
        std::array<double, 2> taus{std::exp(x[0]), terms == 2 ? std::exp(x[1]) : 0.0};
        return taus;
    };
    // objective normalised by |y|^2 so that rescaling the data leaves the
    // simplex path unchanged
    const auto objective = [&](const Vec& x) { return project(data, kind, taus_of(x)).sse / norm2; };

    double t_first = data.back().t;
    for (const auto& d : data)
        if (d.t > 0.0) {
            t_first = d.t;
            break;
        }
    const double t_last = data.back().t;
    const double lo = std::log(0.5 * t_first), hi = std::log(4.0 * t_last);
    const int starts = std::max(2, opts.starts);
    std::vector<double> grid;
    for (int i = 0; i < starts; ++i) grid.push_back(lo + (hi - lo) * i / (starts - 1));

    std::vector<Vec> seeds;
    if (terms == 1) {
        for (double g : grid) seeds.push_back(Vec::Constant(1, g));
    } else {
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = i + 1; j < grid.size(); ++j) seeds.push_back((Vec(2) << grid[i], grid[j]).finished());
    }

    Simplex best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& s : seeds) {
        auto r = nelder_mead(objective, s, 0.5, opts);
        // restart from the optimum to shake off a collapsed simplex
        auto polished = nelder_mead(objective, r.best, 0.05, opts);
        polished.iterations += r.iterations;
        if (polished.value < best.value) best = polished;
    }

    const auto taus = taus_of(best.best);
    const Projection proj = project(data, kind, taus);
    FitResult result;
    result.model = assemble(kind, proj, taus);
    result.residual_rms = std::sqrt(proj.sse / static_cast<double>(data.size()));
    result.iterations = best.iterations;

    // gradient of the normalised objective in log-time coordinates
    double grad_norm = 0.0;
    for (Eigen::Index k = 0; k < best.best.size(); ++k) {
        Vec up = best.best, down = best.best;
        up[k] += 1e-5;
        down[k] -= 1e-5;
        const double g = (objective(up) - objective(down)) / 2e-5;
        grad_norm += g * g;
    }
    grad_norm = std::sqrt(grad_norm);
    bool positive = true;
    for (int i = 0; i < parameter_count(kind); ++i) positive = positive && result.model.params[static_cast<std::size_t>(i)] > 0.0;
    result.converged = best.converged && grad_norm <= 1e-6 && positive;
    result.covariance_diag = covariance_diagonal(data, result.model, proj.sse);
    return result;
}

std::vector<DecayPoint> generate(const DecayModel& model, const std::vector<double>& times, double noise_fraction,
                                 std::uint64_t seed) {
    if (!(noise_fraction >= 0.0)) throw Error(ErrorKind::parameter, "noise fraction must be nonnegative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<DecayPoint> out;
    out.reserve(times.size());
    for (double t : times) {
        const double clean = evaluate(model, t);
        const double y = noise_fraction == 0.0 ? clean : clean * (1.0 + noise_fraction * normal(rng));
        out.push_back({t, y});
    }
    return out;
}

std::vector<double> linear_times(double t0, double t1, int n) {
    if (n < 2) throw Error(ErrorKind::parameter, "need at least two time points");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(t0 + (t1 - t0) * i / (n - 1));
    return out;
}

std::vector<double> log_times(double t0, double t1, int n) {
    if (n < 2 || !(t0 > 0.0) || !(t1 > t0)) throw Error(ErrorKind::parameter, "log-spaced times need 0 < t0 < t1 and n >= 2");
    std::vector<double> out;
    const double a = std::log(t0), b = std::log(t1);
    for (int i = 0; i < n; ++i) out.push_back(std::exp(a + (b - a) * i / (n - 1)));
    return out;
}

}  // namespace zefoz
