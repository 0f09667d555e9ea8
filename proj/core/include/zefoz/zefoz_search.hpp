#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zefoz/zeeman_derivatives.hpp"

namespace zefoz {

struct SearchBox {
    Vec3 lower = Vec3::Constant(-1500.0);
    Vec3 upper = Vec3::Constant(1500.0);
    double grid_step = 50.0;        // G
    double newton_tol = 1.0e-6;     // MHz/G
    int max_iters = 100;
    double dedupe_radius = 1.0;     // G
    double exclusion_radius = 5.0;  // G, no seeds this close to B = 0
    double flat_threshold = 1.0e-6; // MHz/G^2
    Vec3 c2_axis = Vec3::UnitY();
    int workers = 1;
    DerivativeOptions derivatives;
};

/// Throws Error(usage) for reversed/empty bounds or nonpositive step/tolerances.
void validate(const SearchBox& box);

/// Number of grid nodes along each axis: floor((upper - lower) / step) + 1.
std::array<int, 3> grid_shape(const SearchBox& box);

struct GridSample {
    Field b = Field::Zero();
    std::optional<double> gradient_norm;  // empty where the levels are degenerate
};

/// Gradient norm of the transition on the box grid, in lexicographic
/// (x, then y, then z) order. Output order does not depend on box.workers.
std::vector<GridSample> scan_gradient_norm(const SpinHamiltonian& h, const Transition& tr, const SearchBox& box);

enum class PointClass { minimum, maximum, saddle, quasi_flat };

const char* to_string(PointClass c) noexcept;

/// A Hessian eigenvalue with |lambda| < flat_threshold counts as flat; any
/// flat direction makes the point quasi-flat, otherwise the signs decide.
PointClass classify(const Vec3& hessian_eigenvalues, double flat_threshold);

struct CriticalPoint {
    Field b = Field::Zero();
    double frequency = 0.0;
    double gradient_norm = 0.0;
    Vec3 hessian_eigenvalues = Vec3::Zero();
    Mat3 hessian_axes = Mat3::Identity();
    PointClass classification = PointClass::quasi_flat;
    double curvature_score = 0.0;  // max |lambda|
    Site subsite = Site::a;
    Transition transition;
    int iterations = 0;
};

struct RefineResult {
    bool converged = false;
    CriticalPoint point;  // best iterate when not converged
    std::string reason;
};

/// Damped Newton on grad f = 0 with the analytic Hessian, step halving up to
/// 20 times when |grad f| does not decrease, iterates clamped to the box.
RefineResult refine_critical_point(const SpinHamiltonian& h, const Transition& tr, const Field& seed,
                                   const SearchBox& box, Site site = Site::a);

/// Critical points of one transition for both subsites: scan, seed at grid
/// local minima of |grad f| (outside the exclusion ball), refine, dedupe,
/// classify, and sort ascending by curvature score.
std::vector<CriticalPoint> find_all(const SpinSystem& sys, const InteractionTensors& t, const Transition& tr,
                                    const SearchBox& box);

/// find_all for one already-built Hamiltonian (single subsite).
std::vector<CriticalPoint> find_all_for_site(const SpinHamiltonian& h, const Transition& tr, const SearchBox& box,
                                             Site site);

/// find_all over several transitions sharing one grid scan per subsite.
std::vector<CriticalPoint> find_all_transitions(const SpinSystem& sys, const InteractionTensors& t,
                                                const std::vector<Transition>& transitions, const SearchBox& box);

/// Refines from explicit seeds rather than a grid scan; dedupe, classify and
/// sort as in find_all.
std::vector<CriticalPoint> refine_seeds(const SpinHamiltonian& h, const Transition& tr,
                                        const std::vector<Field>& seeds, const SearchBox& box, Site site);

/// Ascending by curvature score; ties broken by field, subsite, then
/// transition so the order is total.
void sort_by_curvature(std::vector<CriticalPoint>& points);

/// Outcome of trying one Euler convention against a reference critical
/// point.
struct ConventionTrial {
    EulerConvention convention = EulerConvention::zyz;
    bool converged = false;
    CriticalPoint point;
    double field_error = 0.0;      // max |component difference|, G
    double frequency_error = 0.0;  // MHz
};

/// For each convention, refines from `reference_field` on every transition
/// of site a whose frequency there is within `frequency_window` of
/// `reference_frequency`, keeping the trial closest to the reference.
/// Results are sorted best first (converged, then field error, then
/// frequency error).
std::vector<ConventionTrial> convention_sweep(const SpinSystem& sys, const TensorParams& params,
                                              const Field& reference_field, double reference_frequency,
                                              const SearchBox& box, double frequency_window = 1.0);

}  // namespace zefoz
