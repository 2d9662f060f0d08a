#pragma once

#include <Eigen/Dense>

namespace audlet {

// Unnormalized forward DFT: X[j] = sum_n x[n] exp(-2 pi i j n / N).
Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& x);
Eigen::VectorXcd fft_forward(const Eigen::VectorXd& x);

// Inverse DFT with the 1/N factor; exact inverse of fft_forward.
Eigen::VectorXcd fft_inverse(const Eigen::VectorXcd& X);

}  // namespace audlet
