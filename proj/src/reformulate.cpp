#include "cczsg/reformulate.hpp"

#include <cmath>

namespace cczsg {
namespace {

constexpr double kNegligible = 1e-14;

double max_abs(const RMat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

RMat flip_imag_blocks(const RMat& composite) {
    const Eigen::Index n = composite.rows() / 2;
    RMat k = composite;
    k.topRightCorner(n, n) *= -1.0;
    k.bottomLeftCorner(n, n) *= -1.0;
    return k;
}

}  // namespace

void ChanceRow::validate() const {
    moments.validate();
    validate_model(model, moments.dim());
    safety_factor(model, level);  // range check
}

bool SocData::satisfied(const RVec& x, double tol) const {
    RVec lhs = f * x;
    if (g.size() == lhs.size()) lhs += g;
    return lhs.norm() <= h.dot(x) + c + tol;
}

double DeterministicConstraint::lhs(const RVec& x) const {
    double value = mean.dot(x);
    for (const auto& term : norms) value += term.scale * (term.factor * x).norm();
    return value;
}

std::vector<SocData> DeterministicConstraint::cones() const {
    std::vector<SocData> out;
    const Eigen::Index dim = mean.size();
    for (const auto& term : norms) {
        SocData soc;
        soc.f = term.scale * term.factor;
        soc.g = RVec::Zero(term.factor.rows());
        soc.h = RVec::Zero(dim);
        soc.c = 0.0;
        out.push_back(std::move(soc));
    }
    if (out.size() == 1) {
        out.front().h = -mean;
        out.front().c = rhs;
    }
    return out;
}

RMat k_matrix(const ComplexMoments& m) { return flip_imag_blocks(composite_from_complex(m)); }

RMat k_matrix_from_composite(const RMat& composite) {
    if (composite.rows() != composite.cols() || composite.rows() % 2 != 0) {
        throw Error(ErrorCode::OddDimension, "composite covariance must be 2n x 2n");
    }
    return flip_imag_blocks(0.5 * (composite + composite.transpose()));
}

RMat factor_psd(const RMat& k) {
    if (k.rows() != k.cols()) throw Error(ErrorCode::DimensionMismatch, "factor_psd: matrix not square");
    if (k.rows() == 0) return RMat(0, 0);
    const double scale = std::max(1.0, max_abs(k));
    if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw Error(ErrorCode::NotPSD, "factor_psd: matrix not symmetric");
    }
    const RMat sym = 0.5 * (k + k.transpose());
    const double tol = 1e-8 * (1.0 + sym.norm());
    Eigen::LLT<RMat> llt(sym);
    if (llt.info() == Eigen::Success) {
        RMat q = llt.matrixU();
        if ((q.transpose() * q - sym).norm() <= tol) return q;
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(sym);
    const RVec& ev = es.eigenvalues();
    if (ev.minCoeff() < -1e-9 * scale) throw Error(ErrorCode::NotPSD, "factor_psd: negative eigenvalue");
    return ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

CouplingMatrices coupling_from_factor(const RMat& q) {
    if (q.rows() != q.cols() || q.rows() % 2 != 0) {
        throw Error(ErrorCode::OddDimension, "coupling_from_factor: factor must be 2n x 2n");
    }
    const Eigen::Index n = q.rows() / 2;
    const RMat q1 = q.topLeftCorner(n, n);
    const RMat q2 = q.topRightCorner(n, n);
    const RMat q3 = q.bottomLeftCorner(n, n);
    const RMat q4 = q.bottomRightCorner(n, n);
    CouplingMatrices out;
    out.qhat1 = CMat(n, n);
    out.qhat2 = CMat(n, n);
    out.qhat1.real() = q1 + q4;
    out.qhat1.imag() = q3 - q2;
    out.qhat2.real() = q1 - q4;
    out.qhat2.imag() = q3 + q2;
    return out;
}

CVec CouplingMatrices::apply_adjoint(const CVec& lambda) const {
    require_same_dims(lambda.size(), qhat1.rows(), "coupling apply_adjoint");
    return 0.5 * (qhat1.adjoint() * lambda + qhat2.transpose() * lambda.conjugate());
}

RMat CouplingMatrices::adjoint_embedding() const {
    const CMat h1 = qhat1.adjoint();
    const CMat h2 = qhat2.transpose();
    return 0.5 * (embed_mat(h1) + embed_mat(h2) * conjugation_embedding(qhat1.rows()));
}

CMat ellipsoid_shape(const UnknownMomentsModel& model) {
    return complex_from_composite(model.bound).gamma;
}

DeterministicConstraint deterministic_constraint(const ChanceRow& row) {
    row.validate();
    const double k = safety_factor(row.model, row.level);

    DeterministicConstraint out;
    out.mean = embed_vec(row.moments.mu.conjugate());
    out.rhs = row.rhs;

    RMat kmat;
    if (const auto* u = std::get_if<UnknownSecondMomentModel>(&row.model)) {
        kmat = k_matrix_from_composite(u->bound);
    } else if (const auto* u = std::get_if<UnknownMomentsModel>(&row.model)) {
        kmat = k_matrix_from_composite(u->bound);
    } else {
        kmat = k_matrix(row.moments);
    }
    if (k > kNegligible && max_abs(kmat) > kNegligible) {
        out.norms.push_back({k, factor_psd(kmat), false});
    }
    if (const auto* u = std::get_if<UnknownMomentsModel>(&row.model)) {
        const CMat shape = ellipsoid_shape(*u);
        if (u->zeta > kNegligible && shape.cwiseAbs().maxCoeff() > kNegligible) {
            out.norms.push_back({std::sqrt(u->zeta), embed_mat(hermitian_sqrt(shape)), true});
        }
    }
    return out;
}

}  // namespace cczsg
