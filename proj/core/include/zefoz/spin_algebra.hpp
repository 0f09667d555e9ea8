#pragma once

#include <array>

#include "zefoz/types.hpp"

namespace zefoz {

/// Angular momentum operators for a single spin I in the |I, m> basis,
/// ordered m = -I ... +I (Condon-Shortley phases, hbar = 1).
struct SpinSystem {
    int two_i = 0;
    int dim = 0;
    CMatrix ix;
    CMatrix iy;
    CMatrix iz;

    double spin() const { return 0.5 * two_i; }
    const CMatrix& component(int k) const { return k == 0 ? ix : (k == 1 ? iy : iz); }
};

/// Throws Error(invalid_spin) unless 1 <= two_i <= kMaxDim - 1.
SpinSystem make_spin_system(int two_i);

struct HermitianEigensystem {
    RVector values;   // ascending
    CMatrix vectors;  // columns match values
};

/// Full eigendecomposition of a small dense Hermitian matrix.
///
/// Each eigenvector is rephased so that its largest-magnitude component is
/// real and positive (first such component on ties), which makes the output
/// a deterministic function of the input. Degenerate eigenvalues are
/// reported as computed; clustering is left to callers.
///
/// Throws Error(shape) for a non-square or oversized input and
/// Error(hermiticity) when |h - h^H| exceeds 1e-9 of |h|.
HermitianEigensystem eigensystem(const CMatrix& h);

/// Eigenvalues only; same preconditions as eigensystem().
RVector eigenvalues(const CMatrix& h);

}  // namespace zefoz
