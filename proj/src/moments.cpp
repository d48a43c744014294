#include "cczsg/moments.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace cczsg {
namespace {

constexpr double kPsdTol = 1e-9;

double scale_of(const RMat& a) { return std::max(1.0, a.cwiseAbs().maxCoeff()); }

// Wichura's AS241 (PPND16), the same rational approximation R's qnorm uses.
double normal_quantile_as241(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                     67265.770927008700853) * r + 45921.953931549871457) * r +
                   13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((r * 5226.495278852854561 + 28729.085735721942674) * r +
                     39307.89580009271061) * r + 21213.794301586595867) * r +
                   5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((r * 7.7454501427834140764e-4 + .0227238449892691845833) * r +
                    .24178072517745061177) * r + 1.27045825245236838258) * r +
                  3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                    .0151986665636164571966) * r + .14810397642748007459) * r +
                  .68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                    .0012426609473880784386) * r + .026532189526576123093) * r +
                  .29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                    1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                  .0148753612908506148525) * r + .13692988092273580531) * r +
                .59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

// P(0 <= T <= t) for Student's t, via theta = atan(t / sqrt(nu)):
//   Gamma((nu+1)/2) / (sqrt(pi) Gamma(nu/2)) * int_0^theta cos(phi)^(nu-1) dphi.
double student_half_mass(double nu, double theta) {
    if (theta <= 0.0) return 0.0;
    const double c = std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
                     std::sqrt(std::numbers::pi);
    auto f = [nu](double phi) { return std::pow(std::cos(phi), nu - 1.0); };
    const double fa = f(0.0);
    const double fb = f(theta);
    const double fm = f(0.5 * theta);
    const double whole = theta / 6.0 * (fa + 4.0 * fm + fb);
    return c * adaptive_simpson(f, 0.0, theta, fa, fm, fb, whole, 1e-14, 40);
}

double student_cdf(double nu, double t) {
    const double half = student_half_mass(nu, std::atan(std::fabs(t) / std::sqrt(nu)));
    return t >= 0.0 ? 0.5 + half : 0.5 - half;
}

double student_quantile(double nu, double p) {
    if (p == 0.5) return 0.0;
    const double target = std::fabs(p - 0.5);
    double lo = 0.0;
    double hi = 0.5 * std::numbers::pi;
    // Bisection on theta; stop once the induced interval in t is below 1e-10.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (student_half_mass(nu, mid) < target) lo = mid;
        else hi = mid;
        const double tlo = std::sqrt(nu) * std::tan(lo);
        const double thi = std::sqrt(nu) * std::tan(hi);
        if (std::isfinite(thi) && thi - tlo < 1e-10) break;
    }
    const double t = std::sqrt(nu) * std::tan(0.5 * (lo + hi));
    return p > 0.5 ? t : -t;
}

}  // namespace

QuantileFamily QuantileFamily::student_t(double nu) {
    if (!(nu > 0.0)) throw Error(ErrorCode::Schema, "student-t requires nu > 0");
    return {Kind::StudentT, nu};
}

std::string QuantileFamily::name() const {
    switch (kind) {
        case Kind::Gaussian: return "gaussian";
        case Kind::Laplace: return "laplace";
        case Kind::Logistic: return "logistic";
        case Kind::Cauchy: return "cauchy";
        case Kind::StudentT: {
            std::ostringstream os;
            os << "t:" << nu;
            return os.str();
        }
    }
    return "unknown";
}

ComplexMoments ComplexMoments::proper(CVec mu, CMat gamma) {
    const Eigen::Index n = mu.size();
    return {std::move(mu), std::move(gamma), CMat::Zero(n, n)};
}

void ComplexMoments::validate() const {
    const Eigen::Index n = mu.size();
    if (gamma.rows() != n || gamma.cols() != n || jmat.rows() != n || jmat.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, "moments: gamma/j must be n x n with n = dim(mu)");
    }
    const double tol = 1e-12 * (1.0 + (n > 0 ? gamma.cwiseAbs().maxCoeff() + jmat.cwiseAbs().maxCoeff() : 0.0));
    if (!is_hermitian(gamma, tol)) throw Error(ErrorCode::InconsistentMoments, "gamma is not Hermitian");
    if (!is_symmetric(jmat, tol)) throw Error(ErrorCode::InconsistentMoments, "pseudo-covariance is not symmetric");
    if (n == 0) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gamma, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -kPsdTol * scale) {
        throw Error(ErrorCode::InconsistentMoments, "gamma is not positive semidefinite");
    }
    composite_from_complex(*this);  // throws when the composite is not PSD
}

RMat composite_from_complex(const ComplexMoments& m) {
    const Eigen::Index n = m.dim();
    require_same_dims(m.gamma.rows(), n, "composite_from_complex");
    require_same_dims(m.jmat.rows(), n, "composite_from_complex");
    const CMat sum = m.gamma + m.jmat;
    const CMat diff = m.gamma - m.jmat;
    RMat l(2 * n, 2 * n);
    l.topLeftCorner(n, n) = 0.5 * sum.real();
    l.bottomRightCorner(n, n) = 0.5 * diff.real();
    l.topRightCorner(n, n) = 0.5 * sum.imag();
    l.bottomLeftCorner(n, n) = -0.5 * diff.imag();
    if (n > 0) {
        const RMat sym = 0.5 * (l + l.transpose());
        Eigen::SelfAdjointEigenSolver<RMat> es(sym, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -kPsdTol * scale_of(sym)) {
            throw Error(ErrorCode::InconsistentMoments,
                        "composite covariance of (Re M, Im M) is not positive semidefinite");
        }
        l = sym;
    }
    return l;
}

ComplexMoments complex_from_composite(const RMat& composite) {
    if (composite.rows() != composite.cols() || composite.rows() % 2 != 0) {
        throw Error(ErrorCode::OddDimension, "composite covariance must be 2n x 2n");
    }
    const Eigen::Index n = composite.rows() / 2;
    const RMat rr = composite.topLeftCorner(n, n);
    const RMat ii = composite.bottomRightCorner(n, n);
    const RMat ri = composite.topRightCorner(n, n);
    const RMat ir = composite.bottomLeftCorner(n, n);
    ComplexMoments m;
    m.mu = CVec::Zero(n);
    m.gamma = CMat(n, n);
    m.jmat = CMat(n, n);
    m.gamma.real() = rr + ii;
    m.gamma.imag() = ri - ir;
    m.jmat.real() = rr - ii;
    m.jmat.imag() = ri + ir;
    return m;
}

ProjectionMoments projection_moments(const ComplexMoments& m, const CVec& z) {
    require_same_dims(m.dim(), z.size(), "projection_moments");
    ProjectionMoments out;
    out.mean = (m.mu.transpose() * z)(0).real();
    const double quad = herm_inner(z, m.gamma * z).real();
    const double pseudo = (z.transpose() * m.jmat * z)(0).real();
    double var = 0.5 * (quad + pseudo);
    const double scale = 1.0 + z.squaredNorm() *
                                   (m.dim() > 0 ? m.gamma.cwiseAbs().maxCoeff() + m.jmat.cwiseAbs().maxCoeff() : 0.0);
    if (var < 0.0) {
        if (var < -kPsdTol * scale) {
            throw Error(ErrorCode::InconsistentMoments, "negative projection variance");
        }
        var = 0.0;
    }
    out.variance = var;
    return out;
}

double quantile(const QuantileFamily& family, double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(ErrorCode::POutOfRange, "quantile requires 0 < p < 1");
    }
    switch (family.kind) {
        case QuantileFamily::Kind::Gaussian: {
            double x = normal_quantile_as241(p);
            // One Newton polish against erfc.
            const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
            if (pdf > 1e-300) x -= (normal_cdf(x) - p) / pdf;
            return x;
        }
        case QuantileFamily::Kind::Laplace:
            return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
        case QuantileFamily::Kind::Logistic:
            return std::log(p / (1.0 - p));
        case QuantileFamily::Kind::Cauchy:
            return std::tan(std::numbers::pi * (p - 0.5));
        case QuantileFamily::Kind::StudentT:
            if (!(family.nu > 0.0)) throw Error(ErrorCode::Schema, "student-t requires nu > 0");
            return student_quantile(family.nu, p);
    }
    return 0.0;
}

double standard_cdf(const QuantileFamily& family, double x) {
    switch (family.kind) {
        case QuantileFamily::Kind::Gaussian: return normal_cdf(x);
        case QuantileFamily::Kind::Laplace:
            return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
        case QuantileFamily::Kind::Logistic: return 1.0 / (1.0 + std::exp(-x));
        case QuantileFamily::Kind::Cauchy: return 0.5 + std::atan(x) / std::numbers::pi;
        case QuantileFamily::Kind::StudentT: return student_cdf(family.nu, x);
    }
    return 0.0;
}

std::string model_name(const AmbiguityModel& model) {
    struct Visitor {
        std::string operator()(const CesModel& m) const { return "ces:" + m.family.name(); }
        std::string operator()(const KnownMomentsModel&) const { return "known"; }
        std::string operator()(const UnknownSecondMomentModel&) const { return "unknown-cov"; }
        std::string operator()(const UnknownMomentsModel& m) const {
            std::ostringstream os;
            os << "unknown-moments:" << m.zeta;
            return os.str();
        }
    };
    return std::visit(Visitor{}, model);
}

bool is_robust(const AmbiguityModel& model) { return !std::holds_alternative<CesModel>(model); }

void validate_model(const AmbiguityModel& model, Eigen::Index dim) {
    auto check_bound = [dim](const RMat& l) {
        if (l.rows() != 2 * dim || l.cols() != 2 * dim) {
            throw Error(ErrorCode::DimensionMismatch, "ambiguity bound L must be 2n x 2n");
        }
        if (dim == 0) return;
        if ((l - l.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale_of(l)) {
            throw Error(ErrorCode::InconsistentMoments, "ambiguity bound L is not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<RMat> es(l, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -kPsdTol * scale_of(l)) {
            throw Error(ErrorCode::InconsistentMoments, "ambiguity bound L is not PSD");
        }
    };
    if (const auto* ces = std::get_if<CesModel>(&model)) {
        if (ces->family.kind == QuantileFamily::Kind::StudentT && !(ces->family.nu > 0.0)) {
            throw Error(ErrorCode::Schema, "student-t requires nu > 0");
        }
    } else if (const auto* u = std::get_if<UnknownSecondMomentModel>(&model)) {
        check_bound(u->bound);
    } else if (const auto* u = std::get_if<UnknownMomentsModel>(&model)) {
        if (!(u->zeta >= 0.0)) throw Error(ErrorCode::Schema, "zeta must be nonnegative");
        check_bound(u->bound);
    }
}

double safety_factor(const AmbiguityModel& model, double p) {
    if (std::holds_alternative<CesModel>(model)) {
        if (!(p >= 0.5 && p < 1.0)) {
            throw Error(ErrorCode::POutOfRange, "CES models require p in [0.5, 1)");
        }
        return quantile(std::get<CesModel>(model).family, p);
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(ErrorCode::POutOfRange, "moment-based models require p in (0, 1)");
    }
    return std::sqrt(p / (1.0 - p));
}

double draw_standard(const QuantileFamily& family, std::mt19937_64& rng) {
    switch (family.kind) {
        case QuantileFamily::Kind::Gaussian: return std::normal_distribution<double>(0.0, 1.0)(rng);
        case QuantileFamily::Kind::Laplace: {
            std::exponential_distribution<double> e(1.0);
            return e(rng) - e(rng);
        }
        case QuantileFamily::Kind::Logistic: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            double x;
            do { x = u(rng); } while (x <= 0.0);
            return std::log(x / (1.0 - x));
        }
        case QuantileFamily::Kind::Cauchy: return std::cauchy_distribution<double>(0.0, 1.0)(rng);
        case QuantileFamily::Kind::StudentT: return std::student_t_distribution<double>(family.nu)(rng);
    }
    return 0.0;
}

std::vector<double> sample_projection(const QuantileFamily& family, double mean, double stddev,
                                      std::size_t count, std::uint64_t seed) {
    if (!(stddev >= 0.0)) throw Error(ErrorCode::InconsistentMoments, "negative standard deviation");
    std::mt19937_64 rng(seed);
    std::vector<double> out(count);
    for (auto& x : out) x = mean + stddev * draw_standard(family, rng);
    return out;
}

RMat psd_root(const RMat& a, double neg_tol) {
    if (a.rows() == 0) return RMat(0, 0);
    const RMat sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<RMat> es(sym);
    const RVec& ev = es.eigenvalues();
    if (ev.minCoeff() < -neg_tol * scale_of(sym)) {
        throw Error(ErrorCode::NotPSD, "matrix is not positive semidefinite");
    }
    return es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

CMat hermitian_sqrt(const CMat& a, double neg_tol) {
    if (a.rows() == 0) return CMat(0, 0);
    const Eigen::MatrixXcd herm = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    const RVec& ev = es.eigenvalues();
    const double scale = std::max(1.0, herm.cwiseAbs().maxCoeff());
    if (ev.minCoeff() < -neg_tol * scale) throw Error(ErrorCode::NotPSD, "matrix is not positive semidefinite");
    const Eigen::MatrixXcd v = es.eigenvectors();
    return v * ev.cwiseMax(0.0).cwiseSqrt().cast<Complex>().asDiagonal() * v.adjoint();
}

GaussianRowSampler::GaussianRowSampler(const ComplexMoments& m) : mu_(m.mu) {
    try {
        root_ = psd_root(composite_from_complex(m));
    } catch (const Error& e) {
        throw Error(ErrorCode::InconsistentMoments, e.what());
    }
}

CVec GaussianRowSampler::draw(std::mt19937_64& rng) const {
    const Eigen::Index n = mu_.size();
    std::normal_distribution<double> g(0.0, 1.0);
    RVec xi(2 * n);
    for (Eigen::Index i = 0; i < 2 * n; ++i) xi(i) = g(rng);
    const RVec w = root_ * xi;
    CVec out = mu_;
    for (Eigen::Index i = 0; i < n; ++i) out(i) += Complex(w(i), w(n + i));
    return out;
}

CVec sample_gaussian_row(const ComplexMoments& m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return GaussianRowSampler(m).draw(rng);
}

}  // namespace cczsg
