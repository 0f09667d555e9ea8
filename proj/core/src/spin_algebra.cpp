#include "zefoz/spin_algebra.hpp"

#include <cmath>
#include <string>

#include "zefoz/error.hpp"

namespace zefoz {

SpinSystem make_spin_system(int two_i) {
    if (two_i < 1 || two_i + 1 > kMaxDim) {
        throw Error(ErrorKind::invalid_spin,
                    "spin 2I = " + std::to_string(two_i) + " outside supported range 1.." + std::to_string(kMaxDim - 1));
    }
    SpinSystem s;
    s.two_i = two_i;
    s.dim = two_i + 1;
    const int n = s.dim;
    const double spin = 0.5 * two_i;

    // raising operator: <m+1|I+|m> = sqrt(I(I+1) - m(m+1))
    CMatrix raise = CMatrix::Zero(n, n);
    s.iz = CMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double m = -spin + k;
        s.iz(k, k) = m;
        if (k + 1 < n) raise(k + 1, k) = std::sqrt(spin * (spin + 1.0) - m * (m + 1.0));
    }
    const CMatrix lower = raise.adjoint();
    s.ix = 0.5 * (raise + lower);
    s.iy = Complex(0.0, -0.5) * (raise - lower);
    return s;
}

namespace {

void check_hermitian(const CMatrix& h) {
    if (h.rows() != h.cols() || h.rows() == 0 || h.rows() > kMaxDim) {
        throw Error(ErrorKind::shape, "eigensystem expects a square matrix of dimension 1.." + std::to_string(kMaxDim));
    }
    const double scale = h.norm();
    const double asym = (h - h.adjoint()).norm();
    if (asym > 1e-9 * std::max(scale, 1e-300) && asym > 0.0) {
        throw Error(ErrorKind::hermiticity, "matrix is not Hermitian (|H - H^H| = " + std::to_string(asym) + ")");
    }
}

}  // namespace

HermitianEigensystem eigensystem(const CMatrix& h) {
    check_hermitian(h);
    const CMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::ComputeEigenvectors);
    HermitianEigensystem out;
    out.values = solver.eigenvalues();
    out.vectors = solver.eigenvectors();
    const auto n = out.vectors.rows();
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index best = 0;
        double best_mag = -1.0;
        for (Eigen::Index r = 0; r < n; ++r) {
            const double mag = std::abs(out.vectors(r, c));
            // strict comparison with a relative margin keeps the first index on ties
            if (mag > best_mag * (1.0 + 1e-12)) {
                best_mag = mag;
                best = r;
            }
        }
        if (best_mag > 0.0) {
            const Complex phase = std::conj(out.vectors(best, c)) / best_mag;
            out.vectors.col(c) *= phase;
            out.vectors(best, c) = Complex(std::abs(out.vectors(best, c)), 0.0);
        }
    }
    return out;
}

RVector eigenvalues(const CMatrix& h) {
    check_hermitian(h);
    const CMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

}  // namespace zefoz
