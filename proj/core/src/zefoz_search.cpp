#include "zefoz/zefoz_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <tuple>

#include "zefoz/error.hpp"

namespace zefoz {

void validate(const SearchBox& box) {
    for (int k = 0; k < 3; ++k) {
        if (!std::isfinite(box.lower[k]) || !std::isfinite(box.upper[k]) || box.lower[k] > box.upper[k])
            throw Error(ErrorKind::usage, "search box bounds are reversed or not finite");
    }
    if (!(box.grid_step > 0.0)) throw Error(ErrorKind::usage, "grid step must be positive");
    if (!(box.newton_tol > 0.0)) throw Error(ErrorKind::usage, "Newton tolerance must be positive");
    if (box.max_iters < 1) throw Error(ErrorKind::usage, "max_iters must be at least 1");
    if (!(box.dedupe_radius >= 0.0)) throw Error(ErrorKind::usage, "dedupe radius must be nonnegative");
    if (box.workers < 1) throw Error(ErrorKind::usage, "worker count must be at least 1");
}

std::array<int, 3> grid_shape(const SearchBox& box) {
    std::array<int, 3> n{};
    for (int k = 0; k < 3; ++k) {
        n[static_cast<std::size_t>(k)] = static_cast<int>(std::floor((box.upper[k] - box.lower[k]) / box.grid_step + 1e-9)) + 1;
    }
    return n;
}

const char* to_string(PointClass c) noexcept {
    switch (c) {
        case PointClass::minimum: return "minimum";
        case PointClass::maximum: return "maximum";
        case PointClass::saddle: return "saddle";
        case PointClass::quasi_flat: return "quasi-flat";
    }
    return "quasi-flat";
}

PointClass classify(const Vec3& lambda, double flat_threshold) {
    int pos = 0, neg = 0;
    for (int k = 0; k < 3; ++k) {
        if (std::abs(lambda[k]) < flat_threshold) return PointClass::quasi_flat;
        (lambda[k] > 0.0 ? pos : neg)++;
    }
    if (neg == 0) return PointClass::minimum;
    if (pos == 0) return PointClass::maximum;
    return PointClass::saddle;
}

namespace {

Field node_field(const SearchBox& box, const std::array<int, 3>& shape, std::size_t idx) {
    const auto nz = static_cast<std::size_t>(shape[2]);
    const auto ny = static_cast<std::size_t>(shape[1]);
    const std::size_t iz = idx % nz;
    const std::size_t iy = (idx / nz) % ny;
    const std::size_t ix = idx / (nz * ny);
    return box.lower + box.grid_step * Vec3(static_cast<double>(ix), static_cast<double>(iy), static_cast<double>(iz));
}

// Gradient norms of several transitions from one diagonalisation per node.
// values[t][node]; NaN marks a degenerate node.
std::vector<std::vector<double>> scan_many(const SpinHamiltonian& h, const std::vector<Transition>& transitions,
                                           const SearchBox& box) {
    validate(box);
    const auto shape = grid_shape(box);
    const std::size_t total = static_cast<std::size_t>(shape[0]) * static_cast<std::size_t>(shape[1]) *
                              static_cast<std::size_t>(shape[2]);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> values(transitions.size(), std::vector<double>(total, nan));

    std::vector<Transition> trs;
    for (const auto& tr : transitions) trs.push_back(normalized(tr, h.dim()));

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const Field b = node_field(box, shape, idx);
            const auto es = eigensystem(h.at(b));
            const auto& e = es.values;
            std::array<CVector, 3> diag_ops;
            // only the diagonal of V_k in the eigenbasis is needed
            for (int k = 0; k < 3; ++k) {
                const CMatrix tmp = h.zeeman_operator(k) * es.vectors;
                CVector d(h.dim());
                for (int n = 0; n < h.dim(); ++n) d[n] = es.vectors.col(n).dot(tmp.col(n));
                diag_ops[static_cast<std::size_t>(k)] = d;
            }
            auto isolated = [&](int i) {
                for (int n = 0; n < h.dim(); ++n)
                    if (n != i && std::abs(e[i] - e[n]) <= box.derivatives.gap_floor) return false;
                return true;
            };
            for (std::size_t t = 0; t < trs.size(); ++t) {
                const int lo = trs[t].lo, hi = trs[t].hi;
                if (!isolated(lo) || !isolated(hi)) continue;
                Vec3 g;
                for (int k = 0; k < 3; ++k)
                    g[k] = diag_ops[static_cast<std::size_t>(k)][hi].real() - diag_ops[static_cast<std::size_t>(k)][lo].real();
                values[t][idx] = g.norm();
            }
        }
    };

    const auto workers = static_cast<std::size_t>(std::max(1, box.workers));
    if (workers == 1 || total < 2 * workers) {
        work(0, total);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (total + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(total, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
    }
    return values;
}

std::vector<Field> grid_minima(const std::vector<double>& values, const SearchBox& box) {
    const auto shape = grid_shape(box);
    std::vector<Field> seeds;
    auto at = [&](int x, int y, int z) {
        return static_cast<std::size_t>((x * shape[1] + y) * shape[2] + z);
    };
    for (int x = 0; x < shape[0]; ++x) {
        for (int y = 0; y < shape[1]; ++y) {
            for (int z = 0; z < shape[2]; ++z) {
                const std::size_t idx = at(x, y, z);
                const double v = values[idx];
                if (std::isnan(v)) continue;
                bool minimum = true;
                for (int dx = -1; dx <= 1 && minimum; ++dx) {
                    for (int dy = -1; dy <= 1 && minimum; ++dy) {
                        for (int dz = -1; dz <= 1 && minimum; ++dz) {
                            if (dx == 0 && dy == 0 && dz == 0) continue;
                            const int nx = x + dx, ny = y + dy, nz = z + dz;
                            if (nx < 0 || ny < 0 || nz < 0 || nx >= shape[0] || ny >= shape[1] || nz >= shape[2]) continue;
                            const std::size_t n = at(nx, ny, nz);
                            const double w = values[n];
                            if (std::isnan(w)) continue;
                            // ties go to the lower index so plateaus yield a single seed
                            if (w < v || (w == v && n < idx)) minimum = false;
                        }
                    }
                }
                if (!minimum) continue;
                const Field b = node_field(box, shape, idx);
                if (b.norm() <= box.exclusion_radius) continue;
                seeds.push_back(b);
            }
        }
    }
    return seeds;
}

Field clamp(const Field& b, const SearchBox& box) { return b.cwiseMax(box.lower).cwiseMin(box.upper); }

CriticalPoint make_point(const TransitionSensitivity& s, const Field& b, const Transition& tr, Site site,
                         const SearchBox& box, int iterations) {
    CriticalPoint p;
    p.b = b;
    p.frequency = s.frequency;
    p.gradient_norm = s.gradient_norm();
    p.hessian_eigenvalues = s.hessian_eigen.values;
    p.hessian_axes = s.hessian_eigen.axes;
    p.classification = classify(p.hessian_eigenvalues, box.flat_threshold);
    p.curvature_score = p.hessian_eigenvalues.cwiseAbs().maxCoeff();
    p.subsite = site;
    p.transition = tr;
    p.iterations = iterations;
    return p;
}

}  // namespace

std::vector<GridSample> scan_gradient_norm(const SpinHamiltonian& h, const Transition& tr, const SearchBox& box) {
    const auto values = scan_many(h, {tr}, box);
    const auto shape = grid_shape(box);
    std::vector<GridSample> out(values[0].size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].b = node_field(box, shape, i);
        if (!std::isnan(values[0][i])) out[i].gradient_norm = values[0][i];
    }
    return out;
}

RefineResult refine_critical_point(const SpinHamiltonian& h, const Transition& tr, const Field& seed,
                                   const SearchBox& box, Site site) {
    validate(box);
    const Transition t = normalized(tr, h.dim());
    RefineResult result;
    Field b = clamp(seed, box);
    int iterations = 0;
    int polish_steps = 0;
    auto evaluate = [&](const Field& at) -> std::optional<TransitionSensitivity> {
        auto s = sensitivity(h, at, t, box.derivatives);
        if (s.finite_difference) return std::nullopt;
        return s;
    };
    auto current = evaluate(b);
    if (!current) {
        result.reason = "levels degenerate at the seed";
        result.point.b = b;
        result.point.subsite = site;
        result.point.transition = t;
        return result;
    }
    while (true) {
        const double gnorm = current->gradient_norm();
        if (gnorm < box.newton_tol) result.converged = true;
        // once converged, a few extra steps pin the point well below the
        // tolerance so that dedupe does not depend on where we stopped
        if (result.converged && (gnorm < 1e-4 * box.newton_tol || polish_steps >= 3)) break;
        if (!result.converged && iterations >= box.max_iters) {
            result.reason = "iteration limit reached";
            break;
        }
        // pseudo-inverse Newton step; directions with vanishing curvature are skipped
        const auto& eig = current->hessian_eigen;
        const double lmax = eig.values.cwiseAbs().maxCoeff();
        Vec3 step = Vec3::Zero();
        for (int k = 0; k < 3; ++k) {
            if (std::abs(eig.values[k]) > 1e-12 * lmax && lmax > 0.0) {
                step -= eig.axes.col(k) * (eig.axes.col(k).dot(current->gradient) / eig.values[k]);
            }
        }
        if (!step.allFinite() || step.norm() == 0.0) {
            if (!result.converged) result.reason = "singular Hessian";
            break;
        }
        bool accepted = false;
        double scale = 1.0;
        for (int halving = 0; halving <= 20; ++halving, scale *= 0.5) {
            const Field trial = clamp(b + scale * step, box);
            auto s = evaluate(trial);
            if (s && s->gradient_norm() < gnorm) {
                b = trial;
                current = std::move(s);
                accepted = true;
                break;
            }
        }
        // polishing steps are not counted as iterations
        if (result.converged) {
            ++polish_steps;
        } else {
            ++iterations;
        }
        if (!accepted) {
            if (!result.converged) result.reason = "no decrease of the gradient norm after step halving";
            break;
        }
    }
    result.point = make_point(*current, b, t, site, box, iterations);
    return result;
}

void sort_by_curvature(std::vector<CriticalPoint>& points) {
    std::stable_sort(points.begin(), points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        return std::make_tuple(a.curvature_score, a.b[0], a.b[1], a.b[2], static_cast<int>(a.subsite), a.transition.lo,
                               a.transition.hi) <
               std::make_tuple(b.curvature_score, b.b[0], b.b[1], b.b[2], static_cast<int>(b.subsite), b.transition.lo,
                               b.transition.hi);
    });
}

std::vector<CriticalPoint> refine_seeds(const SpinHamiltonian& h, const Transition& tr,
                                        const std::vector<Field>& seeds, const SearchBox& box, Site site) {
    validate(box);
    std::vector<RefineResult> refined(seeds.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) refined[i] = refine_critical_point(h, tr, seeds[i], box, site);
    };
    const auto workers = static_cast<std::size_t>(std::max(1, box.workers));
    if (workers == 1 || seeds.size() < 2) {
        work(0, seeds.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (seeds.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(seeds.size(), begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
    }
    std::vector<CriticalPoint> kept;
    for (const auto& r : refined) {
        if (!r.converged) continue;
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const CriticalPoint& k) {
            return (k.b - r.point.b).norm() <= box.dedupe_radius;
        });
        if (!duplicate) kept.push_back(r.point);
    }
    sort_by_curvature(kept);
    return kept;
}

std::vector<CriticalPoint> find_all_for_site(const SpinHamiltonian& h, const Transition& tr, const SearchBox& box,
                                             Site site) {
    const auto values = scan_many(h, {tr}, box);
    return refine_seeds(h, normalized(tr, h.dim()), grid_minima(values[0], box), box, site);
}

std::vector<CriticalPoint> find_all_transitions(const SpinSystem& sys, const InteractionTensors& t,
                                                const std::vector<Transition>& transitions, const SearchBox& box) {
    validate(box);
    std::vector<CriticalPoint> all;
    for (Site site : {Site::a, Site::b}) {
        const SpinHamiltonian h(sys, tensors_for_site(t, site, box.c2_axis));
        const auto values = scan_many(h, transitions, box);
        for (std::size_t i = 0; i < transitions.size(); ++i) {
            const auto pts = refine_seeds(h, normalized(transitions[i], h.dim()), grid_minima(values[i], box), box, site);
            all.insert(all.end(), pts.begin(), pts.end());
        }
    }
    sort_by_curvature(all);
    return all;
}

std::vector<CriticalPoint> find_all(const SpinSystem& sys, const InteractionTensors& t, const Transition& tr,
                                    const SearchBox& box) {
    return find_all_transitions(sys, t, {tr}, box);
}

std::vector<ConventionTrial> convention_sweep(const SpinSystem& sys, const TensorParams& params,
                                              const Field& reference_field, double reference_frequency,
                                              const SearchBox& box, double frequency_window) {
    std::vector<ConventionTrial> trials;
    for (EulerConvention c : all_euler_conventions()) {
        TensorParams p = params;
        p.convention = c;
        const SpinHamiltonian h(sys, build_tensors(p));
        const RVector e = eigenvalues(h.at(reference_field));
        std::optional<ConventionTrial> best;
        auto better = [](const ConventionTrial& a, const ConventionTrial& b) {
            return std::make_tuple(!a.converged, a.field_error, a.frequency_error) <
                   std::make_tuple(!b.converged, b.field_error, b.frequency_error);
        };
        for (int lo = 0; lo < h.dim(); ++lo) {
            for (int hi = lo + 1; hi < h.dim(); ++hi) {
                if (std::abs(e[hi] - e[lo] - reference_frequency) > frequency_window) continue;
                const auto r = refine_critical_point(h, Transition{lo, hi, std::nullopt}, reference_field, box, Site::a);
                ConventionTrial trial;
                trial.convention = c;
                trial.converged = r.converged;
                trial.point = r.point;
                trial.field_error = (r.point.b - reference_field).cwiseAbs().maxCoeff();
                trial.frequency_error = std::abs(r.point.frequency - reference_frequency);
                if (!best || better(trial, *best)) best = trial;
            }
        }
        if (!best) {
            ConventionTrial none;
            none.convention = c;
            none.field_error = std::numeric_limits<double>::infinity();
            none.frequency_error = std::numeric_limits<double>::infinity();
            best = none;
        }
        trials.push_back(*best);
    }
    std::stable_sort(trials.begin(), trials.end(), [](const ConventionTrial& a, const ConventionTrial& b) {
        return std::make_tuple(!a.converged, a.field_error, a.frequency_error) <
               std::make_tuple(!b.converged, b.field_error, b.frequency_error);
    });
    return trials;
}

}  // namespace zefoz
