#pragma once

#include <span>
#include <string>
#include <string_view>

#include "zefoz/types.hpp"

namespace zefoz {

/// Euler angle conventions accepted for R(alpha, beta, gamma).
///
///   zyz            R = Rz(alpha) Ry(beta) Rz(gamma)   (intrinsic z-y'-z'')
///   zxz            R = Rz(alpha) Rx(beta) Rz(gamma)   (intrinsic z-x'-z'')
///   xyz_intrinsic  R = Rx(alpha) Ry(beta) Rz(gamma)
///   xyz_extrinsic  R = Rz(gamma) Ry(beta) Rx(alpha)
///
/// All are right-handed active rotations.
enum class EulerConvention { zyz, zxz, xyz_intrinsic, xyz_extrinsic };

std::string_view to_string(EulerConvention c) noexcept;

/// Accepts "zyz", "zxz", "xyz-intrinsic", "xyz-extrinsic" (underscores also
/// accepted). Throws Error(configuration) otherwise.
EulerConvention parse_euler_convention(std::string_view tag);

std::span<const EulerConvention> all_euler_conventions() noexcept;

Mat3 euler_rotation(double alpha_deg, double beta_deg, double gamma_deg, EulerConvention c);

/// 180 degree rotation about `axis`. Throws Error(parameter) for a zero axis.
Mat3 c2_rotation(const Vec3& axis);

enum class Site { a, b };

inline const char* to_string(Site s) noexcept { return s == Site::a ? "a" : "b"; }

inline constexpr double khz_to_mhz(double khz) { return khz / 1000.0; }
inline constexpr double mhz_to_khz(double mhz) { return mhz * 1000.0; }

/// Principal values and orientation as they are usually tabulated:
/// quadrupole E and D in MHz, Zeeman principal values in kHz/G, angles in
/// degrees.
struct TensorParams {
    double e_mhz = 0.0;
    double d_mhz = 0.0;
    Vec3 g_khz_per_gauss = Vec3::Zero();
    Vec3 euler_deg = Vec3::Zero();
    EulerConvention convention = EulerConvention::zyz;
};

/// Ground-state site 1 parameters of Pr3+:Y2SiO5 (crystal frame with the C2
/// axis along y).
TensorParams pr_yso_site1();

/// Effective Zeeman tensor M (MHz/G) and effective quadrupole tensor Q (MHz)
/// in the crystal frame, together with the principal values they came from.
struct InteractionTensors {
    Vec3 q_principal = Vec3::Zero();  // (-E, E, D), MHz
    Vec3 g_principal = Vec3::Zero();  // MHz/G
    Vec3 euler_deg = Vec3::Zero();
    EulerConvention convention = EulerConvention::zyz;
    Mat3 m_matrix = Mat3::Zero();
    Mat3 q_matrix = Mat3::Zero();
};

/// M = R diag(g) R^T, Q = R diag(-E, E, D) R^T.
///
/// Requires E >= 0, D > 0 and every g > 0. E = D = 0 together is accepted as
/// an explicitly quadrupole-free system. Throws Error(parameter) otherwise.
InteractionTensors build_tensors(const TensorParams& params);

/// Tensors given directly as crystal-frame matrices. Both must be symmetric
/// (Error(parameter) otherwise); principal values are recomputed.
InteractionTensors tensors_from_matrices(const Mat3& m_matrix, const Mat3& q_matrix);

/// Tensors of the partner subsite related by a C2 rotation about `axis`:
/// M_b = C M C^T, Q_b = C Q C^T.
InteractionTensors subsite_transform(const InteractionTensors& t, const Vec3& axis = Vec3::UnitY());

/// Tensors for the requested subsite; site a returns `t` unchanged.
InteractionTensors tensors_for_site(const InteractionTensors& t, Site site, const Vec3& c2_axis = Vec3::UnitY());

}  // namespace zefoz
