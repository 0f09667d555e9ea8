#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "zefoz/spin_algebra.hpp"
#include "zefoz/tensors.hpp"

namespace zefoz {

/// Default cap on |B| accepted by field validation, Gauss.
inline constexpr double kDefaultFieldCap = 1.0e4;

/// Throws Error(domain) for non-finite components or |b| above `cap`.
void check_field(const Field& b, double cap = kDefaultFieldCap);

/// H(B) = B.M.I + I.Q.I for one spin and one tensor set, with the
/// field-independent quadrupole part and the three dH/dB_k operators
/// precomputed. Cheap to copy; immutable after construction.
class SpinHamiltonian {
public:
    SpinHamiltonian(const SpinSystem& sys, const InteractionTensors& t);

    CMatrix at(const Field& b) const;

    /// dH/dB_k = sum_m M_km I_m, MHz/G.
    const CMatrix& zeeman_operator(int k) const { return zeeman_[static_cast<std::size_t>(k)]; }
    const CMatrix& quadrupole() const { return quadrupole_; }

    int dim() const { return dim_; }
    const SpinSystem& spin() const { return sys_; }
    const InteractionTensors& tensors() const { return tensors_; }

private:
    SpinSystem sys_;
    InteractionTensors tensors_;
    int dim_;
    CMatrix quadrupole_;
    std::array<CMatrix, 3> zeeman_;
};

/// Throws Error(shape) if the tensors are not symmetric or the spin system
/// is malformed.
CMatrix build_hamiltonian(const SpinSystem& sys, const InteractionTensors& t, const Field& b);

/// Ordered pair of eigenstate indices in ascending-energy order at the field
/// where it is evaluated. `label` carries the zero-field name when the pair
/// was resolved from one.
struct Transition {
    int lo = 0;
    int hi = 1;
    std::optional<std::string> label;
};

/// Throws Error(degenerate_descriptor) for lo == hi and Error(parameter)
/// for indices out of range. Reversed pairs are normalised.
Transition normalized(const Transition& tr, int dim);

double transition_frequency(const SpinHamiltonian& h, const Field& b, const Transition& tr);
double transition_frequency(const SpinSystem& sys, const InteractionTensors& t, const Field& b,
                            const Transition& tr);

inline constexpr double kDefaultOverlapThreshold = 0.6;

/// Energies along a field path with adiabatic connectivity between
/// neighbouring points. connectivity[s][i] is the index at point s+1 of the
/// state that was index i at point s.
struct LevelMap {
    std::vector<Field> fields;
    std::vector<RVector> energies;
    std::vector<std::vector<int>> connectivity;
    std::vector<bool> ambiguous;  // per segment

    /// Index at the last point of the state that was `start_index` at the first.
    int follow(int start_index) const;
    bool any_ambiguous() const;
};

/// Straight path of `points` fields from `from` to `to` inclusive.
std::vector<Field> straight_path(const Field& from, const Field& to, int points);

/// Requires at least two points (Error(usage) otherwise). Segments whose
/// assigned overlap falls below `threshold` are flagged, not rejected.
LevelMap level_map(const SpinHamiltonian& h, const std::vector<Field>& path,
                   double threshold = kDefaultOverlapThreshold);
LevelMap level_map(const SpinSystem& sys, const InteractionTensors& t, const std::vector<Field>& path,
                   double threshold = kDefaultOverlapThreshold);

/// Zero-field labels of the eigenstates at `b`, indexed by ascending energy
/// at `b`. Each entry is 2m of the zero-field doublet the state connects to
/// (e.g. +3 for "+3/2"). |m| orders doublets by <(I.z_Q)^2> at zero field,
/// where z_Q is the principal axis of Q with the largest magnitude. The sign
/// of m is the sign of <I.z_Q> one step off zero field along the straight
/// line towards `b`, with z_Q oriented so that z_Q.b >= 0; when the two
/// projections coincide the upper Zeeman branch is taken as +m.
///
/// Requires half-integer spin with a resolved zero-field doublet structure;
/// throws Error(parameter) otherwise.
std::vector<int> adiabatic_labels(const SpinHamiltonian& h, const Field& b, int steps = 200);

/// "+1/2", "-3/2", ...
std::string format_spin_label(int two_m);
int parse_spin_label(std::string_view text);

/// Parses "+1/2<->+3/2" (also "+1/2:+3/2") into the two 2m labels.
std::pair<int, int> parse_transition_label(std::string_view text);
std::string format_transition_label(int two_m_a, int two_m_b);

/// Resolves a zero-field transition label to the ascending-energy index pair
/// at `b`. Throws Error(parameter) listing the available labels when no
/// state carries one of the requested labels.
Transition resolve_transition_label(const SpinHamiltonian& h, const Field& b, std::string_view label,
                                    int steps = 200);

}  // namespace zefoz
