#pragma once

#include <vector>

#include "zefoz/hamiltonian.hpp"

namespace zefoz {

struct FrequencyWindow {
    double lower = 0.0;  // MHz
    double upper = 1.0e9;

    bool contains(double f) const { return f >= lower && f <= upper; }
};

struct SpectrumLine {
    double frequency = 0.0;
    double intensity = 0.0;  // strongest emitted line at the field point = 1
    Transition transition;
    Site subsite = Site::a;
};

/// All dim(dim-1)/2 transitions of both subsites at b. Intensity is
/// |<i|(M u).I|j>|^2 for RF direction u; where levels are degenerate at
/// zero field the intensity is summed over the partners. Lines outside the
/// window are dropped and the remainder normalised so the strongest is 1.
/// Order: site a then b, then (lo, hi) lexicographic.
std::vector<SpectrumLine> lines_at(const SpinSystem& sys, const InteractionTensors& t, const Field& b,
                                   const Vec3& rf_direction, const FrequencyWindow& window,
                                   const Vec3& c2_axis = Vec3::UnitY());

/// Unnormalised line strengths for a single tensor set, unfiltered.
std::vector<SpectrumLine> raw_lines(const SpinHamiltonian& h, const Field& b, const Vec3& rf_direction, Site site);

struct SpectrumRow {
    int point_index = 0;
    Field b = Field::Zero();
    Site subsite = Site::a;
    int lo = 0;  // state identity at the first path point
    int hi = 0;
    double frequency = 0.0;
    double intensity = 0.0;
};

struct SpectrumTable {
    std::vector<SpectrumRow> rows;
    std::vector<bool> ambiguous_a;  // per segment, from the level maps
    std::vector<bool> ambiguous_b;
};

/// Long-format spectrum along a path. lo/hi are the first-point indices of
/// the lower and upper level, followed through level_map.
SpectrumTable spectrum_vs_field(const SpinSystem& sys, const InteractionTensors& t, const std::vector<Field>& path,
                                const Vec3& rf_direction, const FrequencyWindow& window,
                                const Vec3& c2_axis = Vec3::UnitY());

}  // namespace zefoz
