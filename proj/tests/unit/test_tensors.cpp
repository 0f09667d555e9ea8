#include <doctest.h>

#include "oracles.hpp"
#include "zefoz/error.hpp"
#include "zefoz/spin_algebra.hpp"
#include "zefoz/tensors.hpp"

using namespace zefoz;
using zefoz::testing::Random;

namespace {

Vec3 sorted_eigenvalues(const Mat3& m) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(m);
    return es.eigenvalues();
}

}  // namespace

TEST_CASE("euler rotation basics") {
    for (auto c : all_euler_conventions()) {
        CHECK((euler_rotation(0, 0, 0, c) - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-15);
    }
    const Mat3 r = euler_rotation(90, 0, 0, EulerConvention::zyz);
    CHECK((r * Vec3::UnitX() - Vec3::UnitY()).norm() < 1e-15);
}

TEST_CASE("euler rotations are proper for all conventions") {
    Random rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        for (auto c : all_euler_conventions()) {
            const Mat3 r = euler_rotation(rng.uniform(-360, 360), rng.uniform(-360, 360), rng.uniform(-360, 360), c);
            CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-14);
            CHECK(r.determinant() == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("convention tags parse and round trip") {
    for (auto c : all_euler_conventions()) CHECK(parse_euler_convention(to_string(c)) == c);
    CHECK(parse_euler_convention("xyz_intrinsic") == EulerConvention::xyz_intrinsic);
    try {
        parse_euler_convention("yxy");
        FAIL("expected configuration error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::configuration);
    }
}

TEST_CASE("site 1 quadrupole principal values survive the rotation") {
    const auto p = pr_yso_site1();
    for (auto c : all_euler_conventions()) {
        const Mat3 r = euler_rotation(p.euler_deg[0], p.euler_deg[1], p.euler_deg[2], c);
        const Mat3 q = r * Vec3(-0.5624, 0.5624, 4.4450).asDiagonal() * r.transpose();
        const Vec3 ev = sorted_eigenvalues(q);
        CHECK(ev[0] == doctest::Approx(-0.5624).epsilon(1e-12));
        CHECK(ev[1] == doctest::Approx(0.5624).epsilon(1e-12));
        CHECK(ev[2] == doctest::Approx(4.4450).epsilon(1e-12));
    }
}

TEST_CASE("build tensors from the site 1 parameter set") {
    for (auto c : all_euler_conventions()) {
        auto p = pr_yso_site1();
        p.convention = c;
        const auto t = build_tensors(p);
        CHECK(t.q_matrix.trace() == doctest::Approx(4.4450).epsilon(1e-13));
        CHECK((t.m_matrix - t.m_matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((t.q_matrix - t.q_matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);
        const Vec3 ev = sorted_eigenvalues(t.m_matrix);
        CHECK(ev[0] == doctest::Approx(2.86e-3).epsilon(1e-12));
        CHECK(ev[1] == doctest::Approx(3.05e-3).epsilon(1e-12));
        CHECK(ev[2] == doctest::Approx(11.56e-3).epsilon(1e-12));
    }
}

TEST_CASE("unrotated tensors are diagonal") {
    auto p = pr_yso_site1();
    p.euler_deg = Vec3::Zero();
    const auto t = build_tensors(p);
    const Mat3 expect = Vec3(0.00286, 0.00305, 0.01156).asDiagonal();
    CHECK((t.m_matrix - expect).cwiseAbs().maxCoeff() < 1e-17);
}

TEST_CASE("parameter errors") {
    auto expect_parameter_error = [](TensorParams p) {
        try {
            build_tensors(p);
            FAIL("expected parameter error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::parameter);
        }
    };
    auto p = pr_yso_site1();
    p.d_mhz = -1.0;
    expect_parameter_error(p);
    p = pr_yso_site1();
    p.d_mhz = 0.0;
    expect_parameter_error(p);
    p = pr_yso_site1();
    p.g_khz_per_gauss[1] = 0.0;
    expect_parameter_error(p);
    p = pr_yso_site1();
    p.e_mhz = -0.1;
    expect_parameter_error(p);

    try {
        c2_rotation(Vec3::Zero());
        FAIL("expected parameter error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::parameter);
    }
}

TEST_CASE("quadrupole free systems are allowed") {
    auto p = pr_yso_site1();
    p.e_mhz = 0.0;
    p.d_mhz = 0.0;
    const auto t = build_tensors(p);
    CHECK(t.q_matrix.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("C2 subsite transform is an involution") {
    Random rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        const auto t = rng.tensors();
        const Vec3 axis = rng.unit();
        const auto back = subsite_transform(subsite_transform(t, axis), axis);
        CHECK((back.m_matrix - t.m_matrix).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((back.q_matrix - t.q_matrix).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK((c2_rotation(Vec3::UnitY()) - Vec3(-1, 1, -1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("subsite spectra") {
    const auto sys = make_spin_system(5);
    const auto ta = build_tensors(pr_yso_site1());
    const auto tb = subsite_transform(ta);
    // field along the C2 axis: identical spectra
    for (double by : {-900.0, 10.0, 250.0, 1400.0}) {
        const Field b(0, by, 0);
        CHECK(zefoz::testing::max_abs_diff(eigenvalues(build_hamiltonian(sys, ta, b)),
                                           eigenvalues(build_hamiltonian(sys, tb, b))) < 1e-10);
    }
    // off axis: site b at B equals site a at the C2-rotated field
    const Field bcp(732, 173, -219);
    const RVector eb = eigenvalues(build_hamiltonian(sys, tb, bcp));
    CHECK(zefoz::testing::max_abs_diff(eb, eigenvalues(build_hamiltonian(sys, ta, Field(-732, 173, 219)))) < 1e-10);
    CHECK(zefoz::testing::max_abs_diff(eb, eigenvalues(build_hamiltonian(sys, ta, bcp))) > 1e-3);
}

TEST_CASE("principal values are rotation invariant") {
    Random rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const auto t = rng.tensors();
        const Mat3 r = rng.rotation();
        const auto moved = tensors_from_matrices(r * t.m_matrix * r.transpose(), r * t.q_matrix * r.transpose());
        CHECK((sorted_eigenvalues(moved.m_matrix) - sorted_eigenvalues(t.m_matrix)).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((sorted_eigenvalues(moved.q_matrix) - sorted_eigenvalues(t.q_matrix)).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("unit round trip") {
    Random rng(24);
    for (int trial = 0; trial < 1000; ++trial) {
        const double v = rng.uniform(0.01, 100.0);
        CHECK(std::abs(mhz_to_khz(khz_to_mhz(v)) - v) <= 1e-15 * v);
    }
}

TEST_CASE("asymmetric matrices are rejected") {
    Mat3 m = Mat3::Identity();
    m(0, 1) = 0.1;
    try {
        tensors_from_matrices(m, Mat3::Zero());
        FAIL("expected parameter error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::parameter);
    }
}
