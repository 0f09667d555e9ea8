#include "zefoz/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "zefoz/error.hpp"

namespace zefoz {

namespace {

// Levels closer than this are treated as one degenerate cluster when
// summing line strengths.
constexpr double kClusterTolerance = 1e-7;  // MHz

std::vector<int> clusters(const RVector& e) {
    std::vector<int> id(static_cast<std::size_t>(e.size()), 0);
    for (Eigen::Index i = 1; i < e.size(); ++i) {
        id[static_cast<std::size_t>(i)] = id[static_cast<std::size_t>(i - 1)] + (e[i] - e[i - 1] > kClusterTolerance ? 1 : 0);
    }
    return id;
}

Vec3 unit_direction(const Vec3& u) {
    const double n = u.norm();
    if (!(n > 0.0) || !u.allFinite()) throw Error(ErrorKind::parameter, "RF direction must be a nonzero vector");
    return u / n;
}

}  // namespace

std::vector<SpectrumLine> raw_lines(const SpinHamiltonian& h, const Field& b, const Vec3& rf_direction, Site site) {
    const Vec3 u = unit_direction(rf_direction);
    const auto es = eigensystem(h.at(b));
    const Vec3 coupling = h.tensors().m_matrix * u;
    CMatrix op = CMatrix::Zero(h.dim(), h.dim());
    for (int k = 0; k < 3; ++k) op += coupling[k] * h.spin().component(k);
    const CMatrix rot = es.vectors.adjoint() * op * es.vectors;
    const auto cl = clusters(es.values);

    std::vector<SpectrumLine> lines;
    const int n = h.dim();
    for (int lo = 0; lo < n; ++lo) {
        for (int hi = lo + 1; hi < n; ++hi) {
            double strength = 0.0;
            for (int i = 0; i < n; ++i) {
                if (cl[static_cast<std::size_t>(i)] != cl[static_cast<std::size_t>(lo)]) continue;
                for (int j = 0; j < n; ++j) {
                    if (i == j || cl[static_cast<std::size_t>(j)] != cl[static_cast<std::size_t>(hi)]) continue;
                    // within one cluster count each unordered pair once
                    if (cl[static_cast<std::size_t>(lo)] == cl[static_cast<std::size_t>(hi)] && j < i) continue;
                    strength += std::norm(rot(i, j));
                }
            }
            SpectrumLine line;
            line.frequency = es.values[hi] - es.values[lo];
            line.intensity = strength;
            line.transition = Transition{lo, hi, std::nullopt};
            line.subsite = site;
            lines.push_back(line);
        }
    }
    return lines;
}

std::vector<SpectrumLine> lines_at(const SpinSystem& sys, const InteractionTensors& t, const Field& b,
                                   const Vec3& rf_direction, const FrequencyWindow& window, const Vec3& c2_axis) {
    check_field(b);
    std::vector<SpectrumLine> out;
    for (Site site : {Site::a, Site::b}) {
        const SpinHamiltonian h(sys, tensors_for_site(t, site, c2_axis));
        for (auto& line : raw_lines(h, b, rf_direction, site)) {
            if (window.contains(line.frequency)) out.push_back(line);
        }
    }
    double strongest = 0.0;
    for (const auto& l : out) strongest = std::max(strongest, l.intensity);
    if (strongest > 0.0) {
        for (auto& l : out) l.intensity = l.intensity == strongest ? 1.0 : l.intensity / strongest;
    }
    return out;
}

SpectrumTable spectrum_vs_field(const SpinSystem& sys, const InteractionTensors& t, const std::vector<Field>& path,
                                const Vec3& rf_direction, const FrequencyWindow& window, const Vec3& c2_axis) {
    if (path.empty()) throw Error(ErrorKind::usage, "spectrum path must not be empty");
    SpectrumTable table;
    const int n = sys.dim;

    // identity[site][point][index at point] = index at the first point
    std::array<std::vector<std::vector<int>>, 2> identity;
    for (Site site : {Site::a, Site::b}) {
        auto& ids = identity[static_cast<std::size_t>(site)];
        std::vector<int> current(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) current[static_cast<std::size_t>(i)] = i;
        ids.push_back(current);
        if (path.size() >= 2) {
            const auto map = level_map(sys, tensors_for_site(t, site, c2_axis), path);
            for (const auto& perm : map.connectivity) {
                std::vector<int> next(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i) next[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = current[static_cast<std::size_t>(i)];
                current = next;
                ids.push_back(current);
            }
            (site == Site::a ? table.ambiguous_a : table.ambiguous_b) = map.ambiguous;
        }
    }

    for (std::size_t p = 0; p < path.size(); ++p) {
        for (const auto& line : lines_at(sys, t, path[p], rf_direction, window, c2_axis)) {
            const auto& ids = identity[static_cast<std::size_t>(line.subsite)][p];
            SpectrumRow row;
            row.point_index = static_cast<int>(p);
            row.b = path[p];
            row.subsite = line.subsite;
            row.lo = ids[static_cast<std::size_t>(line.transition.lo)];
            row.hi = ids[static_cast<std::size_t>(line.transition.hi)];
            row.frequency = line.frequency;
            row.intensity = line.intensity;
            table.rows.push_back(row);
        }
    }
    return table;
}

}  // namespace zefoz
