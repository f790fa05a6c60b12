#include "dampctl/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dampctl {

SpectralBasis build_basis(int n_modes) {
    if (n_modes < 1) throw std::invalid_argument("build_basis: n_modes must be >= 1");
    SpectralBasis b;
    b.n_modes = n_modes;
    b.eigenvalues.resize(n_modes);
    b.dmap.resize(n_modes, 2);
    const double pi = std::numbers::pi;
    for (int i = 0; i < n_modes; ++i) {
        const double npi = (i + 1) * pi;
        b.eigenvalues(i) = -npi * npi;
        // int_0^1 (1-x) sqrt2 sin(n pi x) dx and int_0^1 x sqrt2 sin(n pi x) dx
        b.dmap(i, 0) = std::sqrt(2.0) / npi;
        b.dmap(i, 1) = ((i % 2 == 0) ? 1.0 : -1.0) * std::sqrt(2.0) / npi;
    }
    return b;
}

ModalVector dirichlet_map(const BoundaryVector& u, const SpectralBasis& basis) {
    // Du lies in Dom(-A)^{1/4-eps}; tagged 0 since the tag is metadata only.
    return {basis.dmap * u, 0.0};
}

ModalVector apply_AD(const BoundaryVector& u, const SpectralBasis& basis) {
    return {basis.eigenvalues.cwiseProduct(basis.dmap * u), -1.0};
}

ModalVector apply_fractional(double alpha, const ModalVector& v, const SpectralBasis& basis) {
    ModalVector out{v.coeffs, v.space_tag - alpha};
    for (int i = 0; i < out.coeffs.size(); ++i) out.coeffs(i) *= std::pow(-basis.eigenvalues(i), alpha);
    return out;
}

BoundaryVector adjoint_AD(const Eigen::VectorXd& p, const SpectralBasis& basis) {
    return basis.dmap.transpose() * basis.eigenvalues.cwiseProduct(p);
}

BoundaryVector adjoint_AD(const ModalVector& p, const SpectralBasis& basis) {
    return adjoint_AD(p.coeffs, basis);
}

double dual_norm_sq(const Eigen::VectorXd& c, const SpectralBasis& basis) {
    return c.cwiseQuotient(basis.eigenvalues).squaredNorm();
}

}  // namespace dampctl
