#pragma once

#include <vector>

#include "zefoz/hamiltonian.hpp"

namespace zefoz {

struct DerivativeOptions {
    /// Gaps (MHz) below which the perturbation sum is abandoned for
    /// finite differences.
    double gap_floor = 1.0e-6;
    double fd_step_gradient = 0.01;  // G
    double fd_step_hessian = 0.1;    // G
    /// A gap smaller than resolution_factor * (Zeeman coupling) *
    /// fd_step_hessian raises the degeneracy flag: below it the level
    /// repulsion varies on the scale of one finite-difference step.
    double resolution_factor = 100.0;
};

/// First derivatives dE_n/dB_k of every level at b (Hellmann-Feynman),
/// MHz/G. Row n is level n in ascending order.
///
/// Throws Error(degenerate_level) if any level is within gap_floor of a
/// neighbour, since its derivative is then not unique.
std::vector<Vec3> level_gradients(const SpinHamiltonian& h, const Field& b,
                                  const DerivativeOptions& opts = {});

/// Gradient of E_hi - E_lo with respect to the field, MHz/G.
///
/// Throws Error(degenerate_level) when lo or hi is within gap_floor of any
/// other level; use finite_difference_gradient() there instead.
Vec3 zeeman_gradient(const SpinHamiltonian& h, const Field& b, const Transition& tr,
                     const DerivativeOptions& opts = {});

/// Second-order perturbation Hessian of E_hi - E_lo, MHz/G^2. Falls back to
/// central differences of the analytic gradient (step fd_step_hessian) when
/// an intermediate state is within gap_floor; `used_fallback` reports it.
Mat3 zeeman_hessian(const SpinHamiltonian& h, const Field& b, const Transition& tr,
                    const DerivativeOptions& opts = {}, bool* used_fallback = nullptr);

/// Central differences of transition_frequency with step fd_step_gradient.
Vec3 finite_difference_gradient(const SpinHamiltonian& h, const Field& b, const Transition& tr,
                                const DerivativeOptions& opts = {});

/// Second central differences of transition_frequency with step
/// fd_step_hessian.
Mat3 finite_difference_hessian(const SpinHamiltonian& h, const Field& b, const Transition& tr,
                               const DerivativeOptions& opts = {});

/// Symmetric 3x3 eigensystem, eigenvalues ascending, axes as columns with
/// the largest-magnitude component of each axis made positive.
struct CurvatureAxes {
    Vec3 values = Vec3::Zero();
    Mat3 axes = Mat3::Identity();
};

CurvatureAxes curvature_axes(const Mat3& hessian);

struct TransitionSensitivity {
    double frequency = 0.0;          // MHz
    Vec3 gradient = Vec3::Zero();    // MHz/G
    Mat3 hessian = Mat3::Zero();     // MHz/G^2
    CurvatureAxes hessian_eigen;
    /// Some gap entering the derivatives is small enough that the
    /// perturbative result is not reliable at the finite-difference scale
    /// (gap below gap_floor, or below the Zeeman coupling over one Hessian
    /// step).
    bool degeneracy_flag = false;
    /// Derivatives were obtained by finite differences rather than
    /// perturbation theory.
    bool finite_difference = false;

    double gradient_norm() const { return gradient.norm(); }
};

/// Bundles frequency, gradient, Hessian and its eigensystem. Never throws
/// for degeneracy: degenerate target levels switch to finite differences
/// and set both flags.
TransitionSensitivity sensitivity(const SpinHamiltonian& h, const Field& b, const Transition& tr,
                                  const DerivativeOptions& opts = {});
TransitionSensitivity sensitivity(const SpinSystem& sys, const InteractionTensors& t, const Field& b,
                                  const Transition& tr, const DerivativeOptions& opts = {});

/// Largest spectral norm among the three dH/dB_k operators, MHz/G.
double zeeman_coupling_scale(const SpinHamiltonian& h);

}  // namespace zefoz
