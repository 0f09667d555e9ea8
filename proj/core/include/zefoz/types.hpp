#pragma once

#include <complex>

#include <Eigen/Dense>

namespace zefoz {

/// Largest supported spin multiplicity (I = 15/2).
inline constexpr int kMaxDim = 16;

using Complex = std::complex<double>;
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using RVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Magnetic field in Gauss, crystal frame.
using Field = Vec3;

}  // namespace zefoz
