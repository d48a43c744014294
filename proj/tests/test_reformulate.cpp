#include <doctest.h>

#include <cmath>
#include <random>

#include "cczsg/reformulate.hpp"
#include "support.hpp"

using namespace cczsg;
using testsupport::random_cmat;
using testsupport::random_cvec;
using testsupport::random_hpsd;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Consistent moments with a nonzero pseudo-covariance.
ComplexMoments improper_moments(std::mt19937_64& rng, Eigen::Index n) {
    ComplexMoments m;
    m.mu = random_cvec(rng, n);
    const CMat a = random_cmat(rng, n, n, 0.5);
    const CMat c = random_cmat(rng, n, n, 0.5);
    // Row w = xi^T a + eta^T c with xi complex proper (E conj(xi) xi^T = I, E xi xi^T = 0)
    // and eta real standard: gamma = a^H a + c^H c, J = c^T c.
    m.gamma = a.adjoint() * a + c.adjoint() * c;
    m.gamma = 0.5 * (m.gamma + m.gamma.adjoint()).eval();
    m.jmat = c.transpose() * c;
    m.jmat = 0.5 * (m.jmat + m.jmat.transpose()).eval();
    return m;
}

ComplexMoments scalar(Complex mu, Complex gamma, Complex j) {
    ComplexMoments m;
    m.mu = CVec::Constant(1, mu);
    m.gamma = CMat::Constant(1, 1, gamma);
    m.jmat = CMat::Constant(1, 1, j);
    return m;
}

}  // namespace

TEST_CASE("k_matrix examples") {
    CHECK((k_matrix(scalar(0, 2, 0)) - RMat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);
    RMat real_only(2, 2);
    real_only << 2, 0, 0, 0;
    CHECK((k_matrix(scalar(0, 2, 2)) - real_only).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("quadratic-form identity on random moments") {
    std::mt19937_64 rng(40);
    for (int t = 0; t < 200; ++t) {
        const Eigen::Index n = 1 + t % 6;
        const ComplexMoments m = improper_moments(rng, n);
        CHECK_NOTHROW(m.validate());
        const RMat k = k_matrix(m);
        CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        const CVec z = random_cvec(rng, n);
        const RVec x = embed_vec(z);
        const double direct = 0.5 * ((z.adjoint() * m.gamma * z)(0).real() + (z.transpose() * m.jmat * z)(0).real());
        CHECK(std::fabs(x.dot(k * x) - direct) <= 1e-9 * (1 + std::fabs(direct)));
        CHECK((k_matrix_from_composite(composite_from_complex(m)) - k).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("factor_psd reconstruction") {
    CHECK((factor_psd(RMat::Identity(4, 4)).transpose() * factor_psd(RMat::Identity(4, 4)) - RMat::Identity(4, 4))
              .norm() <= 1e-12);
    CHECK(factor_psd(RMat::Zero(4, 4)).norm() <= 1e-12);

    std::mt19937_64 rng(41);
    for (int t = 0; t < 50; ++t) {
        const ComplexMoments m = improper_moments(rng, 1 + t % 5);
        const RMat k = k_matrix(m);
        const RMat q = factor_psd(k);
        CHECK((q.transpose() * q - k).norm() <= 1e-8 * (1 + k.norm()));
    }
    // Rank-deficient K of a proper scalar row.
    const RMat k = k_matrix(scalar(0, 2, 2));
    const RMat q = factor_psd(k);
    CHECK((q.transpose() * q - k).norm() <= 1e-12);

    RMat bad = RMat::Identity(2, 2);
    bad(0, 0) = -1;
    try {
        factor_psd(bad);
        FAIL("expected NotPSD");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotPSD);
    }
}

TEST_CASE("coupling matrices") {
    const CouplingMatrices id = coupling_from_factor(RMat::Identity(6, 6));
    CHECK((id.qhat1 - 2.0 * CMat::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(id.qhat2.cwiseAbs().maxCoeff() == 0.0);
    const CouplingMatrices zero = coupling_from_factor(RMat::Zero(4, 4));
    CHECK(zero.qhat1.cwiseAbs().maxCoeff() == 0.0);
    CHECK(zero.qhat2.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(coupling_from_factor(RMat::Identity(3, 3)), Error);

    std::mt19937_64 rng(42);
    std::normal_distribution<double> g;
    for (int t = 0; t < 200; ++t) {
        const Eigen::Index n = 1 + t % 5;
        RMat q(2 * n, 2 * n);
        for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = g(rng);
        const CouplingMatrices c = coupling_from_factor(q);
        const CVec lam = random_cvec(rng, n), u = random_cvec(rng, n);
        const double real_form = embed_vec(lam).dot(q * embed_vec(u));
        const double complex_form =
            0.5 * ((lam.adjoint() * c.qhat1 * u)(0) + (lam.adjoint() * c.qhat2 * u.conjugate())(0)).real();
        CHECK(std::fabs(real_form - complex_form) <= 1e-9 * (1 + std::fabs(real_form)));
        CHECK((embed_vec(c.apply_adjoint(lam)) - q.transpose() * embed_vec(lam)).norm() <= 1e-9 * (1 + q.norm()));
        CHECK((c.adjoint_embedding() * embed_vec(lam) - q.transpose() * embed_vec(lam)).norm() <= 1e-9 * (1 + q.norm()));
    }
}

TEST_CASE("deterministic constraint examples") {
    ChanceRow row;
    row.moments = scalar(0, 2, 0);
    row.model = CesModel{QuantileFamily::gaussian()};
    row.level = 0.95;
    row.rhs = 1.0;
    const DeterministicConstraint dc = deterministic_constraint(row);
    std::mt19937_64 rng(43);
    for (int t = 0; t < 20; ++t) {
        const CVec z = random_cvec(rng, 1);
        CHECK(dc.lhs(embed_vec(z)) == doctest::Approx(1.6448536269514722 * std::abs(z(0))).epsilon(1e-12));
    }

    ChanceRow lin;
    lin.moments = scalar(Complex(2.0, 0.0), 0, 0);
    lin.rhs = 3.0;
    const DeterministicConstraint dl = deterministic_constraint(lin);
    CHECK(dl.linear());
    const CVec z = CVec::Constant(1, Complex(0.5, 0.25));
    CHECK(dl.lhs(embed_vec(z)) == doctest::Approx(1.0));
    CHECK(dl.slack(embed_vec(z)) == doctest::Approx(2.0));

    // Unknown first and second moments, proper, zero mean.
    const double zeta = 0.3, p = 0.8;
    const CMat gh = random_hpsd(rng, 3);
    ChanceRow um;
    um.moments = ComplexMoments::proper(CVec::Zero(3), gh);
    um.model = UnknownMomentsModel{zeta, composite_from_complex(um.moments)};
    um.level = p;
    const DeterministicConstraint du = deterministic_constraint(um);
    CHECK(du.norms.size() == 2);
    for (int t = 0; t < 20; ++t) {
        const CVec w = random_cvec(rng, 3);
        const double form = std::sqrt((w.adjoint() * gh * w)(0).real());
        const double expected = (std::sqrt(p / (2.0 * (1.0 - p))) + std::sqrt(zeta)) * form;
        CHECK(du.lhs(embed_vec(w)) == doctest::Approx(expected).epsilon(1e-10));
    }
    CHECK((ellipsoid_shape(std::get<UnknownMomentsModel>(um.model)) - gh).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("cone data reproduces the constraint") {
    std::mt19937_64 rng(44);
    for (int t = 0; t < 50; ++t) {
        ChanceRow row;
        row.moments = improper_moments(rng, 3);
        row.model = KnownMomentsModel{};
        row.level = 0.9;
        row.rhs = 2.0;
        const DeterministicConstraint dc = deterministic_constraint(row);
        const auto cones = dc.cones();
        REQUIRE(cones.size() == 1);
        const RVec x = embed_vec(random_cvec(rng, 3, 0.3));
        CHECK(cones[0].satisfied(x, 1e-12) == (dc.slack(x) >= -1e-12));
    }
}

TEST_CASE("Gaussian exactness on the constraint boundary") {
    std::mt19937_64 rng(45);
    std::uniform_real_distribution<double> level(0.5, 0.999);
    for (int t = 0; t < 100; ++t) {
        ChanceRow row;
        row.moments = improper_moments(rng, 1 + t % 4);
        row.level = level(rng);
        row.rhs = 0.0;
        const CVec z = random_cvec(rng, row.moments.dim());
        row.rhs = deterministic_constraint(row).lhs(embed_vec(z));  // z on the boundary
        const ProjectionMoments pm = projection_moments(row.moments, z);
        const double prob = normal_cdf((row.rhs - pm.mean) / std::sqrt(pm.variance));
        CHECK(std::fabs(prob - row.level) <= 1e-6);
    }
}

TEST_CASE("tightening in p and robust ordering") {
    std::mt19937_64 rng(46);
    const ComplexMoments m = improper_moments(rng, 3);
    for (int t = 0; t < 100; ++t) {
        const RVec x = embed_vec(random_cvec(rng, 3));
        double last = -1e300;
        for (double p : {0.55, 0.7, 0.85, 0.95, 0.99}) {
            ChanceRow row;
            row.moments = m;
            row.level = p;
            const double lhs = deterministic_constraint(row).lhs(x);
            CHECK(lhs >= last - 1e-12);
            last = lhs;
        }
    }
    for (double p = 0.5; p < 0.999; p += 0.005) {
        CHECK(safety_factor(KnownMomentsModel{}, p) >= safety_factor(CesModel{QuantileFamily::gaussian()}, p));
    }
}

TEST_CASE("invalid rows") {
    ChanceRow row;
    row.moments = scalar(0, 1, 0);
    row.level = 0.2;
    CHECK_THROWS_AS(deterministic_constraint(row), Error);
    row.level = 0.9;
    row.moments = scalar(0, 1, 5);
    CHECK_THROWS_AS(deterministic_constraint(row), Error);
}
