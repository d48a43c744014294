#pragma once

#include <vector>

#include "cczsg/moments.hpp"

namespace cczsg {

/// P[Re(M z) <= rhs] >= level, M a random row described by `moments` and `model`.
struct ChanceRow {
    ComplexMoments moments;
    AmbiguityModel model = CesModel{QuantileFamily::gaussian()};
    double rhs = 0.0;
    double level = 0.95;

    void validate() const;
};

/// ||F x + g|| <= h^T x + c over the embedded variable x = phi1(z).
struct SocData {
    RMat f;
    RVec g;
    RVec h;
    double c = 0.0;

    bool satisfied(const RVec& x, double tol = 0.0) const;
};

/// One weighted norm term scale * ||factor * x||.
struct NormTerm {
    double scale = 0.0;
    RMat factor;
    bool mean_ellipsoid = false;  // the sqrt(zeta) term of the unknown-moments model
};

/// mean^T x + sum_j scale_j ||factor_j x|| <= rhs, the deterministic equivalent of a ChanceRow.
struct DeterministicConstraint {
    RVec mean;  // phi1(mu^H), so that mean^T phi1(z) = Re(mu z)
    double rhs = 0.0;
    std::vector<NormTerm> norms;

    bool linear() const { return norms.empty(); }
    double lhs(const RVec& x) const;
    double slack(const RVec& x) const { return rhs - lhs(x); }

    /// Cone data for every norm term; the first carries the mean and rhs
    /// when there is a single term, otherwise h = 0, c = 0 and the terms are
    /// tied together through auxiliary epigraph scalars by the caller.
    std::vector<SocData> cones() const;
};

/// K with phi1(z)^T K phi1(z) = 1/2 (z^H G z + Re(z^T J z)).
RMat k_matrix(const ComplexMoments& m);

/// Same quadratic form built from a composite covariance bound L.
RMat k_matrix_from_composite(const RMat& composite);

/// Q with Q^T Q = K. Cholesky when K is positive definite, eigen factor otherwise.
RMat factor_psd(const RMat& k);

struct CouplingMatrices {
    CMat qhat1;
    CMat qhat2;

    /// 1/2 (qhat1^H lam + qhat2^T conj(lam)), whose embedding equals Q^T phi1(lam).
    CVec apply_adjoint(const CVec& lambda) const;

    /// Real 2n x 2n matrix of lam -> phi1(apply_adjoint(lam)) acting on phi1(lam).
    RMat adjoint_embedding() const;
};

CouplingMatrices coupling_from_factor(const RMat& q);

/// Deterministic second-order cone equivalent of a chance row.
DeterministicConstraint deterministic_constraint(const ChanceRow& row);

/// Hermitian matrix G^ of the mean ellipsoid for the unknown-moments model.
CMat ellipsoid_shape(const UnknownMomentsModel& model);

}  // namespace cczsg
