#include "sdkim/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace sdkim {

GaussHermite::GaussHermite(int nodes) {
  if (nodes < 1) throw std::invalid_argument("GaussHermite: need at least one node");
  // Jacobi matrix of the probabilists' Hermite polynomials
  Matrix jacobi = Matrix::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  nodes_ = eig.eigenvalues();
  weights_ = eig.eigenvectors().row(0).transpose().array().square().matrix();
  weights_ /= weights_.sum();
}

}  // namespace sdkim
