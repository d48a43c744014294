#include "cczsg/complex_core.hpp"

#include <string>

namespace cczsg {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::InconsistentMoments: return "InconsistentMoments";
        case ErrorCode::POutOfRange: return "POutOfRange";
        case ErrorCode::NotPSD: return "NotPSD";
        case ErrorCode::OddDimension: return "OddDimension";
        case ErrorCode::EmptyStrategySet: return "EmptyStrategySet";
        case ErrorCode::SlaterViolated: return "SlaterViolated";
        case ErrorCode::GapTooLarge: return "GapTooLarge";
        case ErrorCode::SolverFailure: return "SolverFailure";
        case ErrorCode::MalformedProgram: return "MalformedProgram";
        case ErrorCode::SamplerStarvation: return "SamplerStarvation";
        case ErrorCode::UnsampleableModel: return "UnsampleableModel";
        case ErrorCode::ModulusViolation: return "ModulusViolation";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::Schema: return "Schema";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

void require_same_dims(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
    }
}

RVec embed_vec(const CVec& a) {
    const Eigen::Index n = a.size();
    RVec x(2 * n);
    x.head(n) = a.real();
    x.tail(n) = a.imag();
    return x;
}

CVec unembed_vec(const RVec& x) {
    if (x.size() % 2 != 0) {
        throw Error(ErrorCode::OddDimension, "unembed_vec: odd length " + std::to_string(x.size()));
    }
    const Eigen::Index n = x.size() / 2;
    CVec a(n);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = Complex(x(i), x(n + i));
    return a;
}

RMat embed_mat(const CMat& a) {
    const Eigen::Index n = a.rows();
    const Eigen::Index m = a.cols();
    RMat x(2 * n, 2 * m);
    x.topLeftCorner(n, m) = a.real();
    x.topRightCorner(n, m) = -a.imag();
    x.bottomLeftCorner(n, m) = a.imag();
    x.bottomRightCorner(n, m) = a.real();
    return x;
}

CMat unembed_mat(const RMat& x) {
    if (x.rows() % 2 != 0 || x.cols() % 2 != 0) {
        throw Error(ErrorCode::OddDimension, "unembed_mat: odd block dimensions");
    }
    const Eigen::Index n = x.rows() / 2;
    const Eigen::Index m = x.cols() / 2;
    CMat a(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) a(i, j) = Complex(x(i, j), x(n + i, j));
    return a;
}

Complex herm_inner(const CVec& a, const CVec& b) {
    require_same_dims(a.size(), b.size(), "herm_inner");
    return a.dot(b);  // Eigen's dot conjugates the first argument
}

CVec dual_norm_certificate(const CVec& z) {
    const double norm = z.norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::ZeroVector, "dual_norm_certificate: zero vector");
    return z / norm;
}

bool is_hermitian(const CMat& a, double tol) {
    if (a.rows() != a.cols()) return false;
    if (a.size() == 0) return true;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_symmetric(const CMat& a, double tol) {
    if (a.rows() != a.cols()) return false;
    if (a.size() == 0) return true;
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

RMat conjugation_embedding(Eigen::Index n) {
    RMat c = RMat::Identity(2 * n, 2 * n);
    c.bottomRightCorner(n, n) *= -1.0;
    return c;
}

}  // namespace cczsg
