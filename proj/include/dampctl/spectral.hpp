#ifndef DAMPCTL_SPECTRAL_HPP
#define DAMPCTL_SPECTRAL_HPP

#include <Eigen/Dense>

namespace dampctl {

/// Eigenpairs of the Dirichlet Laplacian on (0,1) and the modal coefficients
/// of the harmonic extensions of the two boundary unit inputs.
struct SpectralBasis {
    int n_modes = 0;
    Eigen::VectorXd eigenvalues;  // lambda_n = -(n pi)^2
    Eigen::MatrixXd dmap;         // n_modes x 2, column k = boundary point k

    double lambda(int n) const { return eigenvalues(n); }
};

/// Truncated eigencoefficients. space_tag is the exponent alpha of the space
/// Dom(-A)^alpha the vector models; it is documentation only.
struct ModalVector {
    Eigen::VectorXd coeffs;
    double space_tag = 0.0;
};

using BoundaryVector = Eigen::Vector2d;

SpectralBasis build_basis(int n_modes);

ModalVector dirichlet_map(const BoundaryVector& u, const SpectralBasis& basis);
ModalVector apply_AD(const BoundaryVector& u, const SpectralBasis& basis);
ModalVector apply_fractional(double alpha, const ModalVector& v, const SpectralBasis& basis);
BoundaryVector adjoint_AD(const ModalVector& p, const SpectralBasis& basis);
BoundaryVector adjoint_AD(const Eigen::VectorXd& p, const SpectralBasis& basis);

// Norm of (Dom A)' realized as |A^{-1} c|_H.
double dual_norm_sq(const Eigen::VectorXd& c, const SpectralBasis& basis);

}  // namespace dampctl

#endif
