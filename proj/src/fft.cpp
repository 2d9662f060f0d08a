#include "audlet/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace audlet {

// One FFT engine per thread; it caches twiddle plans per transform size,
// so repeated transforms of the same length reuse the plan.
static Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

// The kissfft backend cannot factor length-1 transforms; they are the
// identity in both directions.

Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& x) {
  if (x.size() <= 1) return x;
  Eigen::VectorXcd X(x.size());
  engine().fwd(X, x);
  return X;
}

Eigen::VectorXcd fft_forward(const Eigen::VectorXd& x) {
  if (x.size() <= 1) return x.cast<std::complex<double>>();
  Eigen::VectorXcd X(x.size());
  engine().fwd(X, x);
  return X;
}

Eigen::VectorXcd fft_inverse(const Eigen::VectorXcd& X) {
  if (X.size() <= 1) return X;
  Eigen::VectorXcd x(X.size());
  engine().inv(x, X);
  return x;
}

}  // namespace audlet
