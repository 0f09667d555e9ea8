#include "zefoz/zeeman_derivatives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "zefoz/error.hpp"

namespace zefoz {

namespace {

// Smallest distance from level i to any other level.
double isolation(const RVector& e, int i) {
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index n = 0; n < e.size(); ++n) {
        if (n != i) gap = std::min(gap, std::abs(e[i] - e[n]));
    }
    return gap;
}

void require_isolated(const RVector& e, int i, double floor) {
    if (isolation(e, i) <= floor) {
        throw Error(ErrorKind::degenerate_level,
                    "level " + std::to_string(i) +
                        " is degenerate at this field; use the finite-difference fallback");
    }
}

// <n|V_k|m> in the eigenbasis
std::array<CMatrix, 3> rotated_operators(const SpinHamiltonian& h, const CMatrix& vectors) {
    std::array<CMatrix, 3> ops;
    for (int k = 0; k < 3; ++k) ops[static_cast<std::size_t>(k)] = vectors.adjoint() * h.zeeman_operator(k) * vectors;
    return ops;
}

Vec3 level_gradient(const std::array<CMatrix, 3>& ops, int i) {
    return Vec3(ops[0](i, i).real(), ops[1](i, i).real(), ops[2](i, i).real());
}

Mat3 level_hessian(const std::array<CMatrix, 3>& ops, const RVector& e, int i) {
    Mat3 out = Mat3::Zero();
    for (Eigen::Index n = 0; n < e.size(); ++n) {
        if (n == i) continue;
        const double denom = e[i] - e[n];
        for (int k = 0; k < 3; ++k) {
            for (int l = k; l < 3; ++l) {
                const Complex term = ops[static_cast<std::size_t>(k)](i, n) * ops[static_cast<std::size_t>(l)](n, i);
                out(k, l) += 2.0 * term.real() / denom;
            }
        }
    }
    out.triangularView<Eigen::StrictlyLower>() = out.transpose().triangularView<Eigen::StrictlyLower>();
    return out;
}

Vec3 unit(int k) { return Vec3::Unit(k); }

}  // namespace

std::vector<Vec3> level_gradients(const SpinHamiltonian& h, const Field& b, const DerivativeOptions& opts) {
    const auto es = eigensystem(h.at(b));
    const auto ops = rotated_operators(h, es.vectors);
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(h.dim()));
    for (int i = 0; i < h.dim(); ++i) {
        require_isolated(es.values, i, opts.gap_floor);
        out.push_back(level_gradient(ops, i));
    }
    return out;
}

Vec3 zeeman_gradient(const SpinHamiltonian& h, const Field& b, const Transition& tr, const DerivativeOptions& opts) {
    const Transition t = normalized(tr, h.dim());
    const auto es = eigensystem(h.at(b));
    require_isolated(es.values, t.lo, opts.gap_floor);
    require_isolated(es.values, t.hi, opts.gap_floor);
    const auto ops = rotated_operators(h, es.vectors);
    return level_gradient(ops, t.hi) - level_gradient(ops, t.lo);
}

Vec3 finite_difference_gradient(const SpinHamiltonian& h, const Field& b, const Transition& tr,
                                const DerivativeOptions& opts) {
    const double step = opts.fd_step_gradient;
    Vec3 g;
    for (int k = 0; k < 3; ++k) {
        g[k] = (transition_frequency(h, b + step * unit(k), tr) - transition_frequency(h, b - step * unit(k), tr)) /
               (2.0 * step);
    }
    return g;
}

Mat3 finite_difference_hessian(const SpinHamiltonian& h, const Field& b, const Transition& tr,
                               const DerivativeOptions& opts) {
    const double s = opts.fd_step_hessian;
    const double f0 = transition_frequency(h, b, tr);
    Mat3 out;
    for (int k = 0; k < 3; ++k) {
        out(k, k) = (transition_frequency(h, b + s * unit(k), tr) - 2.0 * f0 + transition_frequency(h, b - s * unit(k), tr)) /
                    (s * s);
        for (int l = k + 1; l < 3; ++l) {
            const Vec3 dk = s * unit(k), dl = s * unit(l);
            const double v = (transition_frequency(h, b + dk + dl, tr) - transition_frequency(h, b + dk - dl, tr) -
                              transition_frequency(h, b - dk + dl, tr) + transition_frequency(h, b - dk - dl, tr)) /
                             (4.0 * s * s);
            out(k, l) = v;
            out(l, k) = v;
        }
    }
    return out;
}

namespace {

Mat3 gradient_difference_hessian(const SpinHamiltonian& h, const Field& b, const Transition& tr,
                                 const DerivativeOptions& opts) {
    const double s = opts.fd_step_hessian;
    Mat3 out;
    try {
        for (int k = 0; k < 3; ++k) {
            out.col(k) = (zeeman_gradient(h, b + s * unit(k), tr, opts) - zeeman_gradient(h, b - s * unit(k), tr, opts)) /
                         (2.0 * s);
        }
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate_level) throw;
        return finite_difference_hessian(h, b, tr, opts);
    }
    return 0.5 * (out + out.transpose());
}

}  // namespace

Mat3 zeeman_hessian(const SpinHamiltonian& h, const Field& b, const Transition& tr, const DerivativeOptions& opts,
                    bool* used_fallback) {
    const Transition t = normalized(tr, h.dim());
    const auto es = eigensystem(h.at(b));
    if (isolation(es.values, t.lo) <= opts.gap_floor || isolation(es.values, t.hi) <= opts.gap_floor) {
        if (used_fallback) *used_fallback = true;
        return gradient_difference_hessian(h, b, t, opts);
    }
    if (used_fallback) *used_fallback = false;
    const auto ops = rotated_operators(h, es.vectors);
    return level_hessian(ops, es.values, t.hi) - level_hessian(ops, es.values, t.lo);
}

CurvatureAxes curvature_axes(const Mat3& hessian) {
    Eigen::SelfAdjointEigenSolver<Mat3> solver(0.5 * (hessian + hessian.transpose()));
    CurvatureAxes out;
    out.values = solver.eigenvalues();
    out.axes = solver.eigenvectors();
    for (int c = 0; c < 3; ++c) {
        Eigen::Index idx = 0;
        out.axes.col(c).cwiseAbs().maxCoeff(&idx);
        if (out.axes(idx, c) < 0.0) out.axes.col(c) *= -1.0;
    }
    return out;
}

double zeeman_coupling_scale(const SpinHamiltonian& h) {
    double scale = 0.0;
    for (int k = 0; k < 3; ++k) scale = std::max(scale, eigenvalues(h.zeeman_operator(k)).cwiseAbs().maxCoeff());
    return scale;
}

TransitionSensitivity sensitivity(const SpinHamiltonian& h, const Field& b, const Transition& tr,
                                  const DerivativeOptions& opts) {
    const Transition t = normalized(tr, h.dim());
    const auto es = eigensystem(h.at(b));
    TransitionSensitivity out;
    out.frequency = es.values[t.hi] - es.values[t.lo];

    const double gap = std::min(isolation(es.values, t.lo), isolation(es.values, t.hi));
    const double resolution = opts.resolution_factor * zeeman_coupling_scale(h) * opts.fd_step_hessian;
    out.degeneracy_flag = gap <= std::max(opts.gap_floor, resolution);

    if (gap <= opts.gap_floor) {
        out.finite_difference = true;
        out.gradient = finite_difference_gradient(h, b, t, opts);
        out.hessian = finite_difference_hessian(h, b, t, opts);
    } else {
        const auto ops = rotated_operators(h, es.vectors);
        out.gradient = level_gradient(ops, t.hi) - level_gradient(ops, t.lo);
        out.hessian = level_hessian(ops, es.values, t.hi) - level_hessian(ops, es.values, t.lo);
    }
    out.hessian_eigen = curvature_axes(out.hessian);
    return out;
}

TransitionSensitivity sensitivity(const SpinSystem& sys, const InteractionTensors& t, const Field& b,
                                  const Transition& tr, const DerivativeOptions& opts) {
    return sensitivity(SpinHamiltonian(sys, t), b, tr, opts);
}

}  // namespace zefoz
