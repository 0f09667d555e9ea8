#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "zefoz/hamiltonian.hpp"
#include "zefoz/tensors.hpp"

namespace zefoz::testing {

// Eigenvalues of a Hermitian matrix via cyclic Jacobi on its real
// symmetric embedding [[Re, -Im], [Im, Re]]. Every eigenvalue appears
// twice in the embedding; one copy of each pair is returned.
template <typename Real>
std::vector<Real> jacobi_eigenvalues(const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>& h) {
    const int n = static_cast<int>(h.rows());
    const int m = 2 * n;
    std::vector<Real> a(static_cast<std::size_t>(m * m));
    auto at = [&](int r, int c) -> Real& { return a[static_cast<std::size_t>(r * m + c)]; };
    Real frob = 0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            at(r, c) = h(r, c).real();
            at(r + n, c + n) = h(r, c).real();
            at(r, c + n) = -h(r, c).imag();
            at(r + n, c) = h(r, c).imag();
            frob += std::norm(h(r, c));
        }
    const Real eps = std::numeric_limits<Real>::epsilon();
    for (int sweep = 0; sweep < 100; ++sweep) {
        Real off = 0;
        for (int r = 0; r < m; ++r)
            for (int c = r + 1; c < m; ++c) off += at(r, c) * at(r, c);
        if (off <= eps * eps * frob * Real(1e-4) || off == 0) break;
        for (int p = 0; p < m; ++p)
            for (int q = p + 1; q < m; ++q) {
                if (at(p, q) == 0) continue;
                const Real theta = (at(q, q) - at(p, p)) / (2 * at(p, q));
                const Real t = (theta >= 0 ? Real(1) : Real(-1)) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const Real c = 1 / std::sqrt(t * t + 1);
                const Real s = t * c;
                for (int k = 0; k < m; ++k) {
                    const Real akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < m; ++k) {
                    const Real apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<Real> d(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) d[static_cast<std::size_t>(k)] = at(k, k);
    std::sort(d.begin(), d.end());
    std::vector<Real> out;
    for (int k = 0; k < m; k += 2) out.push_back((d[static_cast<std::size_t>(k)] + d[static_cast<std::size_t>(k + 1)]) / 2);
    return out;
}

inline std::vector<double> jacobi_eigenvalues(const CMatrix& h) { return jacobi_eigenvalues<double>(h); }

// Transition frequency in extended precision: H = Q + sum_k B_k V_k is
// assembled and diagonalised in long double, so finite differences of it
// are not limited by double roundoff.
inline long double precise_frequency(const SpinHamiltonian& h, const Field& b, const Transition& tr) {
    using LMatrix = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
    LMatrix m = h.quadrupole().cast<std::complex<long double>>();
    for (int k = 0; k < 3; ++k)
        m += static_cast<long double>(b[k]) * h.zeeman_operator(k).cast<std::complex<long double>>();
    const auto e = jacobi_eigenvalues<long double>(m);
    const auto n = normalized(tr, h.dim());
    return e[static_cast<std::size_t>(n.hi)] - e[static_cast<std::size_t>(n.lo)];
}

// Real roots of x^3 + a x^2 + b x + c with three real roots, ascending.
inline std::array<double, 3> cubic_roots(double a, double b, double c) {
    const double q = (a * a - 3.0 * b) / 9.0;
    const double r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
    const double ratio = std::clamp(r / std::sqrt(q * q * q), -1.0, 1.0);
    const double theta = std::acos(ratio);
    const double s = -2.0 * std::sqrt(q);
    std::array<double, 3> x{s * std::cos(theta / 3.0) - a / 3.0,
                            s * std::cos((theta + 2.0 * std::numbers::pi) / 3.0) - a / 3.0,
                            s * std::cos((theta - 2.0 * std::numbers::pi) / 3.0) - a / 3.0};
    std::sort(x.begin(), x.end());
    return x;
}

// Zero-field levels of I = 5/2 with I.Q.I = D Iz^2 - (E/2)(I+^2 + I-^2)
// written in the Q principal frame. The operator only couples m to m +- 2,
// so it splits into the blocks {-5/2, -1/2, 3/2} and {-3/2, 1/2, 5/2};
// both have the same characteristic polynomial.
inline std::array<double, 3> zero_field_doublets(double e, double d) {
    // <m+2| I+^2 |m> for I = 5/2
    auto raise2 = [](double m) {
        const double j = 2.5;
        return std::sqrt((j - m) * (j + m + 1.0)) * std::sqrt((j - m - 1.0) * (j + m + 2.0));
    };
    const double m0 = -2.5, m1 = -0.5, m2 = 1.5;
    const double a00 = d * m0 * m0, a11 = d * m1 * m1, a22 = d * m2 * m2;
    const double a01 = -0.5 * e * raise2(m0);
    const double a12 = -0.5 * e * raise2(m1);
    // det(x - A) for the tridiagonal block
    const double tr = a00 + a11 + a22;
    const double minors = a00 * a11 + a11 * a22 + a00 * a22 - a01 * a01 - a12 * a12;
    const double det = a00 * a11 * a22 - a00 * a12 * a12 - a22 * a01 * a01;
    return cubic_roots(-tr, minors, -det);
}

inline Vec3 fd_gradient(const SpinHamiltonian& h, const Field& b, const Transition& tr, double step) {
    Vec3 g;
    for (int k = 0; k < 3; ++k) {
        Field p = b, m = b;
        p[k] += step;
        m[k] -= step;
        g[k] = static_cast<double>((precise_frequency(h, p, tr) - precise_frequency(h, m, tr)) / (2.0L * step));
    }
    return g;
}

// Second central differences of the frequency itself.
inline Mat3 fd_hessian(const SpinHamiltonian& h, const Field& b, const Transition& tr, double step) {
    Mat3 out;
    const long double f0 = precise_frequency(h, b, tr);
    const long double h2 = static_cast<long double>(step) * step;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            if (i == j) {
                Field p = b, m = b;
                p[i] += step;
                m[i] -= step;
                out(i, i) = static_cast<double>((precise_frequency(h, p, tr) - 2 * f0 + precise_frequency(h, m, tr)) / h2);
            } else {
                auto f = [&](double si, double sj) {
                    Field q = b;
                    q[i] += si * step;
                    q[j] += sj * step;
                    return precise_frequency(h, q, tr);
                };
                out(i, j) = out(j, i) = static_cast<double>((f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4 * h2));
            }
        }
    return out;
}

class Random {
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

    Vec3 vector(double scale) { return Vec3(uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)); }

    Vec3 unit() {
        for (;;) {
            Vec3 v = vector(1.0);
            const double n = v.norm();
            if (n > 0.1 && n <= 1.0) return v / n;
        }
    }

    Mat3 rotation() {
        return euler_rotation(uniform(-180, 180), uniform(0, 180), uniform(-180, 180), EulerConvention::zyz);
    }

    // Tensors on the scale of the rare-earth hyperfine problem.
    InteractionTensors tensors() {
        TensorParams p;
        p.d_mhz = uniform(1.0, 8.0);
        p.e_mhz = uniform(0.0, p.d_mhz / 3.0);
        p.g_khz_per_gauss = Vec3(uniform(1.0, 15.0), uniform(1.0, 15.0), uniform(1.0, 15.0));
        p.euler_deg = Vec3(uniform(-180, 180), uniform(0, 180), uniform(-180, 180));
        p.convention = all_euler_conventions()[static_cast<std::size_t>(integer(0, 3))];
        return build_tensors(p);
    }

    Transition transition(int dim) {
        const int lo = integer(0, dim - 2);
        return Transition{lo, integer(lo + 1, dim - 1), std::nullopt};
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

inline InteractionTensors isotropic_tensors(double g_mhz_per_gauss) {
    return tensors_from_matrices(g_mhz_per_gauss * Mat3::Identity(), Mat3::Zero());
}

inline double max_abs_diff(const RVector& a, const RVector& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double relative_error(double value, double reference, double floor) {
    return std::abs(value - reference) / std::max(std::abs(reference), floor);
}

}  // namespace zefoz::testing
