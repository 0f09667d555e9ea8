#include "zefoz/hamiltonian.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "zefoz/error.hpp"

namespace zefoz {

void check_field(const Field& b, double cap) {
    if (!b.allFinite()) throw Error(ErrorKind::domain, "field components must be finite");
    if (b.norm() > cap) {
        throw Error(ErrorKind::domain,
                    "field magnitude " + std::to_string(b.norm()) + " G exceeds cap " + std::to_string(cap) + " G");
    }
}

namespace {

void check_inputs(const SpinSystem& sys, const InteractionTensors& t) {
    if (sys.dim != sys.two_i + 1 || sys.ix.rows() != sys.dim || sys.iy.rows() != sys.dim || sys.iz.rows() != sys.dim)
        throw Error(ErrorKind::shape, "spin operators do not match the declared dimension");
    const auto sym = [](const Mat3& m) { return (m - m.transpose()).norm() <= 1e-12 * std::max(1.0, m.norm()); };
    if (!sym(t.m_matrix)) throw Error(ErrorKind::shape, "Zeeman tensor M is not symmetric");
    if (!sym(t.q_matrix)) throw Error(ErrorKind::shape, "quadrupole tensor Q is not symmetric");
}

}  // namespace

SpinHamiltonian::SpinHamiltonian(const SpinSystem& sys, const InteractionTensors& t)
    : sys_(sys), tensors_(t), dim_(sys.dim) {
    check_inputs(sys, t);
    quadrupole_ = CMatrix::Zero(dim_, dim_);
    for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
            const double q = t.q_matrix(k, l);
            if (q != 0.0) quadrupole_ += q * (sys.component(k) * sys.component(l));
        }
    }
    quadrupole_ = 0.5 * (quadrupole_ + quadrupole_.adjoint()).eval();
    for (int k = 0; k < 3; ++k) {
        CMatrix op = CMatrix::Zero(dim_, dim_);
        for (int m = 0; m < 3; ++m) op += t.m_matrix(k, m) * sys.component(m);
        zeeman_[static_cast<std::size_t>(k)] = op;
    }
}

CMatrix SpinHamiltonian::at(const Field& b) const {
    CMatrix h = quadrupole_;
    for (int k = 0; k < 3; ++k) h += b[k] * zeeman_[static_cast<std::size_t>(k)];
    return h;
}

CMatrix build_hamiltonian(const SpinSystem& sys, const InteractionTensors& t, const Field& b) {
    return SpinHamiltonian(sys, t).at(b);
}

Transition normalized(const Transition& tr, int dim) {
    if (tr.lo == tr.hi) throw Error(ErrorKind::degenerate_descriptor, "transition needs two distinct levels");
    if (tr.lo < 0 || tr.hi < 0 || tr.lo >= dim || tr.hi >= dim) {
        throw Error(ErrorKind::parameter, "transition (" + std::to_string(tr.lo) + "," + std::to_string(tr.hi) +
                                              ") out of range for dimension " + std::to_string(dim));
    }
    Transition out = tr;
    if (out.lo > out.hi) std::swap(out.lo, out.hi);
    return out;
}

double transition_frequency(const SpinHamiltonian& h, const Field& b, const Transition& tr) {
    const Transition t = normalized(tr, h.dim());
    const RVector e = eigenvalues(h.at(b));
    return e[t.hi] - e[t.lo];
}

double transition_frequency(const SpinSystem& sys, const InteractionTensors& t, const Field& b,
                            const Transition& tr) {
    return transition_frequency(SpinHamiltonian(sys, t), b, tr);
}

int LevelMap::follow(int start_index) const {
    int idx = start_index;
    for (const auto& perm : connectivity) idx = perm[static_cast<std::size_t>(idx)];
    return idx;
}

bool LevelMap::any_ambiguous() const { return std::find(ambiguous.begin(), ambiguous.end(), true) != ambiguous.end(); }

std::vector<Field> straight_path(const Field& from, const Field& to, int points) {
    if (points < 2) throw Error(ErrorKind::usage, "a field path needs at least two points");
    std::vector<Field> path;
    path.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double s = static_cast<double>(i) / (points - 1);
        path.push_back(from + s * (to - from));
    }
    return path;
}

namespace {

// Greedy maximal-overlap assignment: take the largest remaining |<u_i|v_j>|^2
// whose row and column are both free. Returns the permutation and the
// smallest assigned overlap.
std::pair<std::vector<int>, double> align(const CMatrix& prev, const CMatrix& next) {
    const auto n = static_cast<int>(prev.cols());
    const CMatrix ov = prev.adjoint() * next;
    std::vector<std::tuple<double, int, int>> entries;
    entries.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) entries.emplace_back(std::norm(ov(i, j)), i, j);
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
    std::vector<int> perm(static_cast<std::size_t>(n), -1);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    double worst = 1.0;
    int assigned = 0;
    for (const auto& [w, i, j] : entries) {
        if (perm[static_cast<std::size_t>(i)] >= 0 || used[static_cast<std::size_t>(j)]) continue;
        perm[static_cast<std::size_t>(i)] = j;
        used[static_cast<std::size_t>(j)] = true;
        worst = std::min(worst, w);
        if (++assigned == n) break;
    }
    return {perm, worst};
}

}  // namespace

LevelMap level_map(const SpinHamiltonian& h, const std::vector<Field>& path, double threshold) {
    if (path.size() < 2) throw Error(ErrorKind::usage, "level_map needs a path of at least two points");
    LevelMap map;
    map.fields = path;
    map.energies.reserve(path.size());
    CMatrix prev;
    for (std::size_t p = 0; p < path.size(); ++p) {
        check_field(path[p]);
        auto es = eigensystem(h.at(path[p]));
        map.energies.push_back(es.values);
        if (p > 0) {
            auto [perm, worst] = align(prev, es.vectors);
            map.connectivity.push_back(std::move(perm));
            map.ambiguous.push_back(worst < threshold);
        }
        prev = std::move(es.vectors);
    }
    return map;
}

LevelMap level_map(const SpinSystem& sys, const InteractionTensors& t, const std::vector<Field>& path,
                   double threshold) {
    return level_map(SpinHamiltonian(sys, t), path, threshold);
}

std::vector<int> adiabatic_labels(const SpinHamiltonian& h, const Field& b, int steps) {
    const int n = h.dim();
    if (n % 2 != 0) throw Error(ErrorKind::parameter, "zero-field labels need a half-integer spin");
    if (b.norm() == 0.0) throw Error(ErrorKind::parameter, "zero-field labels are undefined at B = 0");
    if (steps < 2) throw Error(ErrorKind::usage, "label tracking needs at least two steps");

    const auto zero = eigensystem(h.quadrupole());
    const double scale = std::max(1e-12, zero.values.cwiseAbs().maxCoeff());
    for (int k = 0; k < n / 2; ++k) {
        const bool paired = zero.values[2 * k + 1] - zero.values[2 * k] <= 1e-9 * scale;
        const bool separated = k + 1 == n / 2 || zero.values[2 * k + 2] - zero.values[2 * k + 1] > 1e-6 * scale;
        if (!paired || !separated || zero.values.cwiseAbs().maxCoeff() == 0.0)
            throw Error(ErrorKind::parameter, "zero-field spectrum has no resolved doublet structure to label");
    }

    // |m| ranking by <(I.z_Q)^2> along the dominant quadrupole axis
    Eigen::SelfAdjointEigenSolver<Mat3> qs(h.tensors().q_matrix);
    Eigen::Index axis = 0;
    qs.eigenvalues().cwiseAbs().maxCoeff(&axis);
    const Vec3 zq = qs.eigenvectors().col(axis);
    CMatrix iq = CMatrix::Zero(n, n);
    for (int k = 0; k < 3; ++k) iq += zq[k] * h.spin().component(k);
    const CMatrix iq2 = iq * iq;
    std::vector<std::pair<double, int>> weight;
    for (int k = 0; k < n / 2; ++k) {
        double w = 0.0;
        for (int member : {2 * k, 2 * k + 1}) {
            const auto v = zero.vectors.col(member);
            w += (v.adjoint() * iq2 * v)(0, 0).real();
        }
        weight.emplace_back(w, k);
    }
    std::stable_sort(weight.begin(), weight.end());
    std::vector<int> two_abs_m(static_cast<std::size_t>(n / 2));
    for (std::size_t r = 0; r < weight.size(); ++r) two_abs_m[static_cast<std::size_t>(weight[r].second)] = 2 * static_cast<int>(r) + 1;

    // sign of m from <I.z_Q> just off zero field, z_Q oriented along the path
    const Vec3 zq_oriented = zq.dot(b) < 0.0 ? Vec3(-zq) : zq;
    CMatrix iq_oriented = CMatrix::Zero(n, n);
    for (int k = 0; k < 3; ++k) iq_oriented += zq_oriented[k] * h.spin().component(k);

    const auto path = straight_path(b / steps, b, steps);
    const auto start = eigensystem(h.at(path.front()));
    const LevelMap map = level_map(h, path);
    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (int k = 0; k < n / 2; ++k) {
        const int m = two_abs_m[static_cast<std::size_t>(k)];
        const auto proj = [&](int i) {
            const auto v = start.vectors.col(i);
            return (v.adjoint() * iq_oriented * v)(0, 0).real();
        };
        // without a usable projection the upper Zeeman branch counts as +m
        const bool lower_is_positive = proj(2 * k) > proj(2 * k + 1) + 1e-9;
        labels[static_cast<std::size_t>(map.follow(2 * k))] = lower_is_positive ? +m : -m;
        labels[static_cast<std::size_t>(map.follow(2 * k + 1))] = lower_is_positive ? -m : +m;
    }
    return labels;
}

std::string format_spin_label(int two_m) {
    std::string s = two_m < 0 ? "-" : "+";
    s += std::to_string(std::abs(two_m));
    s += "/2";
    return s;
}

int parse_spin_label(std::string_view text) {
    auto bad = [&] { return Error(ErrorKind::parameter, "cannot parse spin label '" + std::string(text) + "'"); };
    if (text.size() < 4) throw bad();
    int sign = 1;
    if (text.front() == '+' || text.front() == '-') {
        sign = text.front() == '-' ? -1 : 1;
        text.remove_prefix(1);
    } else {
        throw bad();
    }
    const auto slash = text.find('/');
    if (slash == std::string_view::npos || text.substr(slash) != "/2") throw bad();
    int num = 0;
    const auto digits = text.substr(0, slash);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), num);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || num <= 0 || num % 2 == 0) throw bad();
    return sign * num;
}

std::pair<int, int> parse_transition_label(std::string_view text) {
    std::size_t pos = text.find("<->");
    std::size_t width = 3;
    if (pos == std::string_view::npos) {
        pos = text.find(':');
        width = 1;
    }
    if (pos == std::string_view::npos)
        throw Error(ErrorKind::parameter, "transition label '" + std::string(text) + "' must look like +1/2<->+3/2");
    return {parse_spin_label(text.substr(0, pos)), parse_spin_label(text.substr(pos + width))};
}

std::string format_transition_label(int two_m_a, int two_m_b) {
    return format_spin_label(two_m_a) + "<->" + format_spin_label(two_m_b);
}

Transition resolve_transition_label(const SpinHamiltonian& h, const Field& b, std::string_view label, int steps) {
    const auto [ma, mb] = parse_transition_label(label);
    const auto labels = adiabatic_labels(h, b, steps);
    const auto ia = std::find(labels.begin(), labels.end(), ma);
    const auto ib = std::find(labels.begin(), labels.end(), mb);
    if (ia == labels.end() || ib == labels.end() || ia == ib) {
        std::string avail;
        for (int l : labels) avail += (avail.empty() ? "" : ", ") + format_spin_label(l);
        throw Error(ErrorKind::parameter,
                    "transition label '" + std::string(label) + "' is not resolvable; available levels: " + avail);
    }
    Transition tr;
    tr.lo = static_cast<int>(ia - labels.begin());
    tr.hi = static_cast<int>(ib - labels.begin());
    if (tr.lo > tr.hi) std::swap(tr.lo, tr.hi);
    tr.label = format_transition_label(labels[static_cast<std::size_t>(tr.lo)], labels[static_cast<std::size_t>(tr.hi)]);
    return tr;
}

}  // namespace zefoz
