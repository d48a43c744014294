#include <doctest.h>

#include <cmath>
#include <random>

#include "cczsg/games.hpp"
#include "lp_oracle.hpp"
#include "support.hpp"

using namespace cczsg;
using testsupport::random_cmat;
using testsupport::random_cvec;
using testsupport::random_hpsd;

namespace {

GameSpec bare_game(const CMat& a, double alpha, NormMode mode, bool real_only = false) {
    GameSpec g;
    g.payoff = a;
    g.p1.set = {a.rows(), alpha, mode, real_only};
    g.p2.set = {a.cols(), alpha, mode, real_only};
    return g;
}

CMat worked_payoff() {
    CMat a(2, 2);
    a << Complex(0.0833, 0.0223), Complex(0.5122, -0.0122), Complex(0.1012, 0.2557), Complex(0.1500, -0.2069);
    return a;
}

// For n = 2 under the imaginary-part bound the strategy set is the rectangle
// a in [0, 1], |b| <= alpha / sqrt(2) of z = (a + ib, 1 - a - ib); the bilinear
// game is therefore the matrix game between the rectangles' corners.
double rectangle_game_value(const CMat& a, double alpha) {
    const double b = alpha / std::sqrt(2.0);
    std::vector<CVec> corners;
    for (double re : {0.0, 1.0})
        for (double im : {-b, b}) {
            CVec z(2);
            z << Complex(re, im), Complex(1.0 - re, -im);
            corners.push_back(z);
        }
    RMat m(4, 4);
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) m(k, l) = (corners[k].adjoint() * a * corners[l])(0).real();
    return lporacle::matrix_game_value(m);
}

ChanceRow gaussian_row(std::mt19937_64& rng, Eigen::Index n, double level) {
    ChanceRow row;
    row.moments = ComplexMoments::proper(random_cvec(rng, n, 0.5), random_hpsd(rng, n, 0.3 / std::sqrt(double(n))));
    row.level = level;
    return row;
}

// Right-hand side giving the uniform real strategy the stated slack in the unified form.
double rhs_with_slack(const ChanceRow& row, Player player, double slack) {
    const Eigen::Index n = row.moments.dim();
    const RVec x = embed_vec(CVec::Constant(n, 1.0 / double(n)));
    ChanceRow unified = row;
    if (player == Player::Two) unified.moments.mu = -unified.moments.mu;
    unified.rhs = 0.0;
    const double lhs = deterministic_constraint(unified).lhs(x);
    return player == Player::One ? lhs + slack : -(lhs + slack);
}

GameSpec chance_game(std::uint64_t seed, double p1, double p2) {
    std::mt19937_64 rng(seed);
    GameSpec g = bare_game(random_cmat(rng, 4, 4), 1.0, NormMode::TotalNorm);
    for (int k = 0; k < 2; ++k) {
        ChanceRow r1 = gaussian_row(rng, 4, 0.9);
        r1.rhs = rhs_with_slack(r1, Player::One, 0.05);
        r1.level = p1;
        g.p1.chance_rows.push_back(r1);
        ChanceRow r2 = gaussian_row(rng, 4, 0.9);
        r2.rhs = rhs_with_slack(r2, Player::Two, 0.05);
        r2.level = p2;
        g.p2.chance_rows.push_back(r2);
    }
    return g;
}

}  // namespace

TEST_CASE("oracle self-check on classical games") {
    RMat rps(3, 3);
    rps << 0, -1, 1, 1, 0, -1, -1, 1, 0;
    CHECK(std::fabs(lporacle::matrix_game_value(rps)) <= 1e-12);
    RMat pennies(2, 2);
    pennies << 1, -1, -1, 1;
    CHECK(std::fabs(lporacle::matrix_game_value(pennies)) <= 1e-12);
    RMat dominant(2, 2);
    dominant << 3, 2, 1, 0;
    CHECK(lporacle::matrix_game_value(dominant) == doctest::Approx(2.0));
}

TEST_CASE("membership") {
    const CVec uniform = CVec::Constant(4, 0.25);
    CHECK(membership(uniform, {4, 1.0, NormMode::TotalNorm, false}).feasible);
    CHECK(membership(uniform, {4, 1.0, NormMode::TotalNorm, false}).norm == doctest::Approx(0.5));
    CHECK_FALSE(membership(uniform, {4, 0.4, NormMode::TotalNorm, false}).feasible);

    CVec u(2);
    u << Complex(0.652, -0.326), Complex(0.348, 0.326);
    const MembershipReport r = membership(u, {2, 0.5, NormMode::ImagNorm, false});
    CHECK(r.feasible);
    CHECK(r.norm == doctest::Approx(0.461).epsilon(1e-3));
    CHECK_FALSE(membership(u, {2, 0.5, NormMode::ImagNorm, true}).feasible);

    CHECK_THROWS_AS(membership(uniform, {3, 1.0, NormMode::TotalNorm, false}), Error);
}

TEST_CASE("strategy set validation") {
    try {
        StrategySetSpec{4, 0.49, NormMode::TotalNorm, false}.validate();
        FAIL("expected EmptyStrategySet");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyStrategySet);
    }
    CHECK_NOTHROW(StrategySetSpec{4, 0.5, NormMode::TotalNorm, false}.validate());
    CHECK_NOTHROW(StrategySetSpec{4, 0.0, NormMode::ImagNorm, false}.validate());
    CHECK_THROWS_AS((StrategySetSpec{4, -0.1, NormMode::ImagNorm, false}.validate()), Error);
    CHECK(StrategySetSpec{4, 0.0, NormMode::ImagNorm, false}.pins_imaginary());
}

TEST_CASE("identity game") {
    const GameSpec g = bare_game(CMat::Identity(2, 2), 100.0, NormMode::TotalNorm);
    const Equilibrium eq = solve_game(g);
    CHECK(eq.value == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(std::fabs(eq.primal_value - eq.dual_value) <= 1e-6);
    CHECK((eq.u_star - CVec::Constant(2, 0.5)).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK(eq.v_star.real().isApprox(RVec::Constant(2, 0.5), 1e-5));

    const CertificationReport c = certify_saddle(g, eq, 1000, 3, 1e-7);
    CHECK(c.performed);
    CHECK(c.violations == 0);
    CHECK(c.passed);

    // A strategy that is not optimal is caught.
    Equilibrium bad = eq;
    bad.u_star = CVec::Zero(2);
    bad.u_star(0) = 1.0;
    CHECK_FALSE(certify_saddle(g, bad, 1000, 3, 1e-7).passed);
}

TEST_CASE("two-by-two imaginary-norm games against the rectangle oracle") {
    std::mt19937_64 rng(60);
    for (int t = 0; t < 10; ++t) {
        const CMat a = random_cmat(rng, 2, 2);
        const double alpha = 0.1 + 0.2 * t;
        const Equilibrium eq = solve_game(bare_game(a, alpha, NormMode::ImagNorm));
        CHECK(std::fabs(eq.value - rectangle_game_value(a, alpha)) <= 1e-6);
    }
    const Equilibrium w = solve_game(bare_game(worked_payoff(), 0.5, NormMode::ImagNorm));
    CHECK(std::fabs(w.value - rectangle_game_value(worked_payoff(), 0.5)) <= 1e-6);
    CHECK(membership(w.u_star, {2, 0.5, NormMode::ImagNorm, false}, 1e-7).feasible);
    CHECK(membership(w.v_star, {2, 0.5, NormMode::ImagNorm, false}, 1e-7).feasible);
    CHECK(std::fabs(w.value_complex.real() - w.value) <= 1e-6);
    CHECK(certify_saddle(bare_game(worked_payoff(), 0.5, NormMode::ImagNorm), w, 1000, 5, 1e-6).passed);
}

TEST_CASE("real games reduce to the classical linear program") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 10; ++t) {
        const Eigen::Index n = 2 + t % 3, m = 2 + (t + 1) % 3;
        RMat a(n, m);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
        const double oracle = lporacle::matrix_game_value(a);
        const CMat ac = a.cast<Complex>();
        CHECK(std::fabs(solve_game(bare_game(ac, 1.0, NormMode::TotalNorm, true)).value - oracle) <= 1e-6);
        // Imaginary freedom does not help either player when A is real.
        CHECK(std::fabs(solve_game(bare_game(ac, 1.0, NormMode::TotalNorm, false)).value - oracle) <= 1e-6);
        CHECK(std::fabs(solve_game(bare_game(ac, 0.0, NormMode::ImagNorm, false)).value - oracle) <= 1e-6);
    }
}

TEST_CASE("deterministic rows against polytope vertex games") {
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> u(-1, 1);
    int checked = 0;
    for (int t = 0; t < 12; ++t) {
        const Eigen::Index n = 3, m = 3;
        RMat a(n, m);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
        GameSpec g = bare_game(a.cast<Complex>(), 1.0, NormMode::TotalNorm, true);
        RMat g1(1, n), g2(1, m);
        RVec h1(1), h2(1);
        for (Eigen::Index j = 0; j < n; ++j) g1(0, j) = u(rng);
        for (Eigen::Index j = 0; j < m; ++j) g2(0, j) = u(rng);
        h1(0) = g1.row(0).mean() + 0.1;  // uniform strategy strictly feasible
        h2(0) = g2.row(0).mean() - 0.1;
        g.p1.det_rows.push_back({g1.row(0).transpose().cast<Complex>(), h1(0)});
        g.p2.det_rows.push_back({g2.row(0).transpose().cast<Complex>(), h2(0)});

        // Player 2 rows read >=, i.e. -g2 y <= -h2.
        const auto v1 = lporacle::simplex_polytope_vertices(g1, h1);
        const auto v2 = lporacle::simplex_polytope_vertices(-g2, -h2);
        RMat vertex_game(static_cast<Eigen::Index>(v1.size()), static_cast<Eigen::Index>(v2.size()));
        for (std::size_t i = 0; i < v1.size(); ++i)
            for (std::size_t j = 0; j < v2.size(); ++j) vertex_game(i, j) = v1[i].dot(a * v2[j]);
        const Equilibrium eq = solve_game(g);
        CHECK(std::fabs(eq.value - lporacle::matrix_game_value(vertex_game)) <= 1e-6);
        CHECK(player_violation(g.p1, Player::One, eq.u_star) <= 1e-7);
        CHECK(player_violation(g.p2, Player::Two, eq.v_star) <= 1e-7);
        ++checked;
    }
    CHECK(checked == 12);
}

TEST_CASE("chance-constrained games") {
    const GameSpec g = chance_game(63, 0.9, 0.9);
    const Equilibrium eq = solve_game(g);
    CHECK(std::fabs(eq.primal_value - eq.dual_value) <= 1e-6 * (1 + std::fabs(eq.value)));
    CHECK(player_violation(g.p1, Player::One, eq.u_star) <= 1e-7);
    CHECK(player_violation(g.p2, Player::Two, eq.v_star) <= 1e-7);
    CHECK(eq.p1.delta.size() == 2);
    CHECK(eq.p2.delta.size() == 2);
    CHECK((eq.p1.delta.array() >= -1e-8).all());
    CHECK(certify_saddle(g, eq, 300, 9, 1e-6).passed);

    // Player 1 tightening never helps player 1.
    double last = std::numeric_limits<double>::infinity();
    for (double p : {0.6, 0.7, 0.8, 0.95}) {
        const double value = solve_game(chance_game(63, p, 0.9)).value;
        CHECK(value <= last + 1e-6);
        last = value;
    }
}

TEST_CASE("Gaussian level at one half matches the mean-only game") {
    GameSpec g = chance_game(64, 0.5 + 1e-6, 0.5 + 1e-6);
    GameSpec lin = g;
    for (auto* player : {&lin.p1, &lin.p2}) {
        for (const auto& row : player->chance_rows) player->det_rows.push_back({row.moments.mu, row.rhs});
        player->chance_rows.clear();
    }
    CHECK(std::fabs(solve_game(g).value - solve_game(lin).value) <= 1e-4);
}

TEST_CASE("robust models") {
    std::mt19937_64 rng(65);
    GameSpec g = bare_game(random_cmat(rng, 3, 3), 1.0, NormMode::TotalNorm);
    ChanceRow row = gaussian_row(rng, 3, 0.8);
    const RMat bound = composite_from_complex(row.moments);
    const AmbiguityModel models[] = {KnownMomentsModel{}, UnknownSecondMomentModel{bound},
                                     UnknownMomentsModel{0.2, bound}};
    for (const auto& model : models) {
        GameSpec h = g;
        ChanceRow r = row;
        r.model = model;
        r.rhs = rhs_with_slack(r, Player::One, 0.05);
        h.p1.chance_rows.push_back(r);
        ChanceRow r2 = r;
        r2.rhs = rhs_with_slack(r2, Player::Two, 0.05);
        h.p2.chance_rows.push_back(r2);
        const Equilibrium eq = solve_game(h);
        CHECK(std::fabs(eq.primal_value - eq.dual_value) <= 1e-6 * (1 + std::fabs(eq.value)));
        CHECK(player_violation(h.p1, Player::One, eq.u_star) <= 1e-7);
        CHECK(player_violation(h.p2, Player::Two, eq.v_star) <= 1e-7);
        if (std::holds_alternative<UnknownMomentsModel>(model)) {
            CHECK(eq.p1.eta.size() == 1);
            CHECK(eq.p1.eta[0].size() == 3);
        }
    }
}

TEST_CASE("Slater violations are reported") {
    std::mt19937_64 rng(66);
    GameSpec g = bare_game(random_cmat(rng, 3, 3), 1.0, NormMode::TotalNorm);
    ChanceRow row = gaussian_row(rng, 3, 0.9);
    row.rhs = -100.0;  // nothing satisfies Re(Mu) <= -100 with probability 0.9
    g.p1.chance_rows.push_back(row);
    try {
        solve_game(g);
        FAIL("expected SlaterViolated");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SlaterViolated);
    }
    CHECK(slater_margin(g.p1, Player::One) <= 0.0);
    CHECK(slater_margin(g.p2, Player::Two) > 0.0);
}

TEST_CASE("value does not depend on the ordering of strategies") {
    const GameSpec g = chance_game(67, 0.85, 0.9);
    GameSpec perm = g;
    const Eigen::Index n = g.payoff.rows(), m = g.payoff.cols();
    Eigen::PermutationMatrix<Eigen::Dynamic> pr(n), pc(m);
    for (Eigen::Index i = 0; i < n; ++i) pr.indices()(i) = static_cast<int>(n - 1 - i);
    for (Eigen::Index i = 0; i < m; ++i) pc.indices()(i) = static_cast<int>((i + 1) % m);
    perm.payoff = pr * g.payoff * pc.transpose();
    auto permute_rows = [](PlayerSpec& p, const Eigen::PermutationMatrix<Eigen::Dynamic>& q) {
        for (auto& r : p.chance_rows) {
            r.moments.mu = q * r.moments.mu;
            r.moments.gamma = q * r.moments.gamma * q.transpose();
            r.moments.jmat = q * r.moments.jmat * q.transpose();
        }
    };
    permute_rows(perm.p1, pr);
    permute_rows(perm.p2, pc);
    CHECK(std::fabs(solve_game(g).value - solve_game(perm).value) <= 1e-6);
}

TEST_CASE("programs expose the named blocks") {
    const GameSpec g = chance_game(68, 0.9, 0.9);
    const ConicProgram primal = build_primal(g);
    const ConicProgram dual = build_dual(g);
    CHECK(primal.has_var("v"));
    CHECK(dual.has_var("u"));
    CHECK(primal.sense() == Sense::Minimize);
    CHECK(dual.sense() == Sense::Maximize);
    CHECK(primal.var("v").size == 2 * g.payoff.cols());
}

TEST_CASE("strategy sampler stays inside the sets") {
    const GameSpec g = chance_game(69, 0.9, 0.9);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
        CHECK(player_violation(g.p1, Player::One, sample_strategy(g.p1, Player::One, rng)) <= 1e-9);
        CHECK(player_violation(g.p2, Player::Two, sample_strategy(g.p2, Player::Two, rng)) <= 1e-9);
    }
    PlayerSpec tight;
    tight.set = {3, 1.0, NormMode::TotalNorm, false};
    tight.det_rows.push_back({CVec::Constant(3, 1.0), 1.0 - 1e-12});  // sum Re z <= 1 - 1e-12: empty
    CHECK_THROWS_AS(sample_strategy(tight, Player::One, rng, 100), Error);
}
