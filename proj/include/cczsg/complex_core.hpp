#pragma once

#include <complex>

#include <Eigen/Dense>

#include "cczsg/error.hpp"

namespace cczsg {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kAlgebraTol = 1e-10;

// Real embeddings: phi1(a) = [Re a; Im a], phi2(A) = [[Re A, -Im A], [Im A, Re A]].
RVec embed_vec(const CVec& a);
CVec unembed_vec(const RVec& x);
RMat embed_mat(const CMat& a);
CMat unembed_mat(const RMat& x);

/// a^H b. Re(a^H b) equals embed_vec(a) . embed_vec(b).
Complex herm_inner(const CVec& a, const CVec& b);

/// The maximizer u = z/|z| of Re(z^H u) over the unit ball; Re(z^H u) = |z|.
CVec dual_norm_certificate(const CVec& z);

bool is_hermitian(const CMat& a, double tol = 1e-12);
bool is_symmetric(const CMat& a, double tol = 1e-12);

/// Componentwise conjugation as a real-linear map on embedded vectors: diag(I, -I).
RMat conjugation_embedding(Eigen::Index n);

void require_same_dims(Eigen::Index a, Eigen::Index b, const char* what);

}  // namespace cczsg
