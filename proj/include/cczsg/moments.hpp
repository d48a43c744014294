#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "cczsg/complex_core.hpp"

namespace cczsg {

/// First and second moments of a complex random row M (1 x n).
///
/// Conventions follow the row orientation used by the projection Re(M z):
///   gamma = E[(M - mu)^H (M - mu)]   (Hermitian PSD, n x n)
///   jmat  = E[(M - mu)^T (M - mu)]   (symmetric, n x n)
/// so that Var Re(M z) = 1/2 (z^H gamma z + Re(z^T jmat z)).
struct ComplexMoments {
    CVec mu;
    CMat gamma;
    CMat jmat;

    Eigen::Index dim() const { return mu.size(); }

    /// Throws InconsistentMoments / DimensionMismatch when the invariants fail.
    void validate() const;

    static ComplexMoments proper(CVec mu, CMat gamma);
};

struct QuantileFamily {
    enum class Kind { Gaussian, Laplace, Logistic, Cauchy, StudentT };
    Kind kind = Kind::Gaussian;
    double nu = 0.0;  // degrees of freedom, StudentT only

    static QuantileFamily gaussian() { return {Kind::Gaussian, 0.0}; }
    static QuantileFamily laplace() { return {Kind::Laplace, 0.0}; }
    static QuantileFamily logistic() { return {Kind::Logistic, 0.0}; }
    static QuantileFamily cauchy() { return {Kind::Cauchy, 0.0}; }
    static QuantileFamily student_t(double nu);

    std::string name() const;
    bool operator==(const QuantileFamily&) const = default;
};

struct CesModel {
    QuantileFamily family;
};
struct KnownMomentsModel {};
struct UnknownSecondMomentModel {
    RMat bound;  // L: PSD upper bound on Cov(M_R, M_I), 2n x 2n
};
struct UnknownMomentsModel {
    double zeta = 0.0;
    RMat bound;
};

using AmbiguityModel =
    std::variant<CesModel, KnownMomentsModel, UnknownSecondMomentModel, UnknownMomentsModel>;

std::string model_name(const AmbiguityModel& model);
void validate_model(const AmbiguityModel& model, Eigen::Index dim);
bool is_robust(const AmbiguityModel& model);

/// Real composite covariance L = Cov(M_R, M_I) = [[G_R, G_RI], [G_IR, G_I]].
RMat composite_from_complex(const ComplexMoments& m);

/// Inverse of composite_from_complex; mu is set to zero.
ComplexMoments complex_from_composite(const RMat& composite);

struct ProjectionMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean Re(mu z) and variance 1/2 (z^H G z + Re(z^T J z)) of Re(M z).
ProjectionMoments projection_moments(const ComplexMoments& m, const CVec& z);

/// Quantile of the unit-scale standard law of the family, 0 < p < 1.
double quantile(const QuantileFamily& family, double p);

/// Cumulative distribution function of the same standard law.
double standard_cdf(const QuantileFamily& family, double x);

/// k_p of the deterministic reformulation. For UnknownMoments only the
/// sqrt(p/(1-p)) factor is returned; the sqrt(zeta) term is a separate cone.
double safety_factor(const AmbiguityModel& model, double p);

/// i.i.d. draws of mean + stddev * X with X from the standard law of `family`.
std::vector<double> sample_projection(const QuantileFamily& family, double mean, double stddev,
                                      std::size_t count, std::uint64_t seed);

double draw_standard(const QuantileFamily& family, std::mt19937_64& rng);

/// Joint complex Gaussian sampler for a whole row with moments m.
class GaussianRowSampler {
public:
    explicit GaussianRowSampler(const ComplexMoments& m);
    CVec draw(std::mt19937_64& rng) const;

private:
    CVec mu_;
    RMat root_;  // root_ * root_^T = composite covariance
};

CVec sample_gaussian_row(const ComplexMoments& m, std::uint64_t seed);

/// Symmetric PSD square root factor S with S S^T = a (eigen-based, clamps tiny negatives).
RMat psd_root(const RMat& a, double neg_tol = 1e-9);

/// Hermitian PSD square root of a complex matrix.
CMat hermitian_sqrt(const CMat& a, double neg_tol = 1e-9);

}  // namespace cczsg
