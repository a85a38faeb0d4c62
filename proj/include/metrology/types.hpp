#pragma once

#include <complex>
#include <Eigen/Dense>

namespace metrology {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr Complex iu{0.0, 1.0};

} // namespace metrology
