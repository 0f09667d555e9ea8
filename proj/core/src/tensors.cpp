#include "zefoz/tensors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "zefoz/error.hpp"

namespace zefoz {

namespace {

constexpr std::array<EulerConvention, 4> kConventions = {
    EulerConvention::zyz, EulerConvention::zxz, EulerConvention::xyz_intrinsic, EulerConvention::xyz_extrinsic};

Mat3 rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << 1, 0, 0, 0, c, -s, 0, s, c;
    return r;
}

Mat3 rot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, 0, s, 0, 1, 0, -s, 0, c;
    return r;
}

Mat3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return r;
}

constexpr double deg(double x) { return x * std::numbers::pi / 180.0; }

bool is_symmetric(const Mat3& m) {
    return (m - m.transpose()).norm() <= 1e-12 * std::max(1.0, m.norm());
}

}  // namespace

std::string_view to_string(EulerConvention c) noexcept {
    switch (c) {
        case EulerConvention::zyz: return "zyz";
        case EulerConvention::zxz: return "zxz";
        case EulerConvention::xyz_intrinsic: return "xyz-intrinsic";
        case EulerConvention::xyz_extrinsic: return "xyz-extrinsic";
    }
    return "zyz";
}

EulerConvention parse_euler_convention(std::string_view tag) {
    std::string t(tag);
    for (auto& ch : t) {
        if (ch == '_') ch = '-';
    }
    for (auto c : kConventions) {
        if (t == to_string(c)) return c;
    }
    throw Error(ErrorKind::configuration,
                "unknown Euler convention '" + std::string(tag) + "' (expected zyz, zxz, xyz-intrinsic, xyz-extrinsic)");
}

std::span<const EulerConvention> all_euler_conventions() noexcept { return kConventions; }

Mat3 euler_rotation(double alpha_deg, double beta_deg, double gamma_deg, EulerConvention c) {
    const double a = deg(alpha_deg), b = deg(beta_deg), g = deg(gamma_deg);
    switch (c) {
        case EulerConvention::zyz: return rot_z(a) * rot_y(b) * rot_z(g);
        case EulerConvention::zxz: return rot_z(a) * rot_x(b) * rot_z(g);
        case EulerConvention::xyz_intrinsic: return rot_x(a) * rot_y(b) * rot_z(g);
        case EulerConvention::xyz_extrinsic: return rot_z(g) * rot_y(b) * rot_x(a);
    }
    throw Error(ErrorKind::configuration, "unknown Euler convention");
}

Mat3 c2_rotation(const Vec3& axis) {
    const double n = axis.norm();
    if (!(n > 1e-12) || !axis.allFinite()) throw Error(ErrorKind::parameter, "C2 axis must be a nonzero vector");
    const Vec3 u = axis / n;
    return 2.0 * u * u.transpose() - Mat3::Identity();
}

TensorParams pr_yso_site1() {
    TensorParams p;
    p.e_mhz = 0.5624;
    p.d_mhz = 4.4450;
    p.g_khz_per_gauss = Vec3(2.86, 3.05, 11.56);
    p.euler_deg = Vec3(-99.7, 55.7, -40.0);
    p.convention = EulerConvention::zyz;
    return p;
}

InteractionTensors build_tensors(const TensorParams& params) {
    const bool no_quadrupole = params.e_mhz == 0.0 && params.d_mhz == 0.0;
    if (!std::isfinite(params.e_mhz) || params.e_mhz < 0.0)
        throw Error(ErrorKind::parameter, "quadrupole E must be >= 0 (got " + std::to_string(params.e_mhz) + ")");
    if (!no_quadrupole && !(params.d_mhz > 0.0))
        throw Error(ErrorKind::parameter, "quadrupole D must be > 0 (got " + std::to_string(params.d_mhz) + ")");
    for (int k = 0; k < 3; ++k) {
        if (!(params.g_khz_per_gauss[k] > 0.0) || !std::isfinite(params.g_khz_per_gauss[k]))
            throw Error(ErrorKind::parameter, "Zeeman principal values must be > 0");
    }
    if (!params.euler_deg.allFinite()) throw Error(ErrorKind::parameter, "Euler angles must be finite");

    InteractionTensors t;
    t.q_principal = Vec3(-params.e_mhz, params.e_mhz, params.d_mhz);
    t.g_principal = params.g_khz_per_gauss.unaryExpr([](double g) { return khz_to_mhz(g); });
    t.euler_deg = params.euler_deg;
    t.convention = params.convention;
    const Mat3 r = euler_rotation(params.euler_deg[0], params.euler_deg[1], params.euler_deg[2], params.convention);
    t.m_matrix = r * t.g_principal.asDiagonal() * r.transpose();
    t.q_matrix = r * t.q_principal.asDiagonal() * r.transpose();
    // exact symmetry so downstream Hermiticity checks never see roundoff
    t.m_matrix = 0.5 * (t.m_matrix + t.m_matrix.transpose()).eval();
    t.q_matrix = 0.5 * (t.q_matrix + t.q_matrix.transpose()).eval();
    return t;
}

InteractionTensors tensors_from_matrices(const Mat3& m_matrix, const Mat3& q_matrix) {
    if (!is_symmetric(m_matrix) || !is_symmetric(q_matrix))
        throw Error(ErrorKind::parameter, "interaction tensors must be symmetric");
    InteractionTensors t;
    t.m_matrix = m_matrix;
    t.q_matrix = q_matrix;
    t.g_principal = Eigen::SelfAdjointEigenSolver<Mat3>(m_matrix, Eigen::EigenvaluesOnly).eigenvalues();
    t.q_principal = Eigen::SelfAdjointEigenSolver<Mat3>(q_matrix, Eigen::EigenvaluesOnly).eigenvalues();
    return t;
}

InteractionTensors subsite_transform(const InteractionTensors& t, const Vec3& axis) {
    const Mat3 c = c2_rotation(axis);
    InteractionTensors out = t;
    out.m_matrix = c * t.m_matrix * c.transpose();
    out.q_matrix = c * t.q_matrix * c.transpose();
    return out;
}

InteractionTensors tensors_for_site(const InteractionTensors& t, Site site, const Vec3& c2_axis) {
    return site == Site::a ? t : subsite_transform(t, c2_axis);
}

}  // namespace zefoz
