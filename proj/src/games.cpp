#include "cczsg/games.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <random>

namespace cczsg {

using Eigen::Index;

std::string_view to_string(NormMode mode) {
    return mode == NormMode::TotalNorm ? "total" : "imag";
}

void StrategySetSpec::validate() const {
    if (dim < 1) throw Error(ErrorCode::DimensionMismatch, "strategy set dimension must be positive");
    if (!std::isfinite(alpha) || alpha < 0.0) {
        throw Error(ErrorCode::EmptyStrategySet, "norm bound alpha must be finite and nonnegative");
    }
    const double floor = 1.0 / std::sqrt(static_cast<double>(dim));
    if (mode == NormMode::TotalNorm && alpha < floor * (1.0 - 1e-12)) {
        throw Error(ErrorCode::EmptyStrategySet, "total-norm bound " + std::to_string(alpha) +
                                                     " is below 1/sqrt(dim) = " + std::to_string(floor));
    }
}

void GameSpec::validate() const {
    p1.set.validate();
    p2.set.validate();
    if (payoff.rows() != p1.set.dim || payoff.cols() != p2.set.dim) {
        throw Error(ErrorCode::DimensionMismatch, "payoff must be " + std::to_string(p1.set.dim) + " x " +
                                                      std::to_string(p2.set.dim));
    }
    if (!payoff.allFinite()) throw Error(ErrorCode::Schema, "payoff has non-finite entries");
    unified_rows(p1, Player::One);
    unified_rows(p2, Player::Two);
}

std::vector<DeterministicConstraint> unified_rows(const PlayerSpec& spec, Player player) {
    const double sign = player == Player::One ? 1.0 : -1.0;
    std::vector<DeterministicConstraint> rows;
    for (const auto& det : spec.det_rows) {
        require_same_dims(det.coef.size(), spec.set.dim, "deterministic row");
        DeterministicConstraint c;
        c.mean = sign * embed_vec(det.coef.conjugate());
        c.rhs = sign * det.rhs;
        rows.push_back(std::move(c));
    }
    for (const auto& chance : spec.chance_rows) {
        require_same_dims(chance.moments.dim(), spec.set.dim, "chance row");
        ChanceRow row = chance;
        row.moments.mu *= sign;
        row.rhs *= sign;
        rows.push_back(deterministic_constraint(row));
    }
    return rows;
}

namespace {

struct NormParts {
    bool real = false;
    bool imag = false;
    Index count() const { return Index(real) + Index(imag); }
};

NormParts norm_parts(const StrategySetSpec& s) {
    const bool pinned = s.pins_imaginary();
    if (s.mode == NormMode::TotalNorm) return {true, !pinned};
    return {false, !pinned};
}

double bounded_norm(const StrategySetSpec& s, const CVec& z) {
    return s.mode == NormMode::TotalNorm ? z.norm() : z.imag().norm();
}

// Largest violation of the inequalities (sign, norm, rows); equalities excluded.
double inequality_violation(const StrategySetSpec& set, const std::vector<DeterministicConstraint>& rows,
                            const CVec& z) {
    double v = -z.real().minCoeff();
    v = std::max(v, bounded_norm(set, z) - set.alpha);
    const RVec x = embed_vec(z);
    for (const auto& row : rows) v = std::max(v, -row.slack(x));
    return v;
}

double equality_violation(const StrategySetSpec& set, const CVec& z) {
    double v = std::fabs(z.real().sum() - 1.0);
    if (set.pins_imaginary()) v = std::max(v, z.imag().cwiseAbs().maxCoeff());
    else v = std::max(v, std::fabs(z.imag().sum()));
    return v;
}

// Strategy-set and row constraints on the embedded strategy block z. With a
// margin variable t, every inequality must hold with slack t.
void add_own_constraints(ConicProgram& prog, const VarBlock& zb, const StrategySetSpec& set,
                         const std::vector<DeterministicConstraint>& rows, const std::string& tag,
                         Index margin = -1) {
    const Index n = set.dim;
    const Index z0 = zb.offset;
    auto with_margin = [&](AffineRows& r, Index row) {
        if (margin >= 0) r.add(row, margin, -1.0);
    };

    AffineRows sign(n);
    sign.add_identity(0, z0, n);
    for (Index i = 0; i < n; ++i) with_margin(sign, i);
    prog.add_constraint(tag + ".re_nonneg", ConeKind::NonNeg, std::move(sign));

    const bool pinned = set.pins_imaginary();
    AffineRows sums(pinned ? 1 + n : 2);
    for (Index i = 0; i < n; ++i) sums.add(0, z0 + i, 1.0);
    sums.add_constant(0, -1.0);
    if (pinned) sums.add_identity(1, z0 + n, n);
    else
        for (Index i = 0; i < n; ++i) sums.add(1, z0 + n + i, 1.0);
    prog.add_constraint(tag + ".sum", ConeKind::Zero, std::move(sums));

    const NormParts parts = norm_parts(set);
    if (parts.count() > 0) {
        AffineRows cone(1 + parts.count() * n);
        cone.add_constant(0, set.alpha);
        with_margin(cone, 0);
        Index row = 1;
        if (parts.real) {
            cone.add_identity(row, z0, n);
            row += n;
        }
        if (parts.imag) cone.add_identity(row, z0 + n, n);
        prog.add_constraint(tag + ".norm", ConeKind::SOC, std::move(cone));
    }

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const std::string name = tag + ".row" + std::to_string(i);
        if (row.norms.size() <= 1) {
            const Index k = row.norms.empty() ? 0 : row.norms.front().factor.rows();
            AffineRows r(1 + k);
            r.add_constant(0, row.rhs);
            r.add_block(0, z0, -row.mean.transpose());
            with_margin(r, 0);
            if (k > 0) r.add_block(1, z0, row.norms.front().scale * row.norms.front().factor);
            prog.add_constraint(name, k > 0 ? ConeKind::SOC : ConeKind::NonNeg, std::move(r));
            continue;
        }
        const VarBlock t = prog.add_variables(name + ".t", static_cast<Index>(row.norms.size()));
        AffineRows budget(1);
        budget.add_constant(0, row.rhs);
        budget.add_block(0, z0, -row.mean.transpose());
        with_margin(budget, 0);
        for (std::size_t j = 0; j < row.norms.size(); ++j) {
            const auto& term = row.norms[j];
            budget.add(0, t.offset + static_cast<Index>(j), -term.scale);
            AffineRows cone(1 + term.factor.rows());
            cone.add(0, t.offset + static_cast<Index>(j), 1.0);
            cone.add_block(1, z0, term.factor);
            prog.add_constraint(name + ".cone" + std::to_string(j), ConeKind::SOC, std::move(cone));
        }
        prog.add_constraint(name + ".budget", ConeKind::NonNeg, std::move(budget));
    }
}

struct MultiplierBlocks {
    VarBlock delta;
    std::vector<std::vector<VarBlock>> terms;
    VarBlock beta;
    VarBlock beta_norm;
    VarBlock rho;
    VarBlock r;
    NormParts parts;
    bool pinned = false;
};

// Multipliers of the inner player's best response and the stationarity
// equations  coupling * outer - sum delta_i mean_i - sum F_ij^T m_ij - beta + [r; 0] - phi1(conj(rho) 1) = 0.
// The objective gets obj_sign * (sum delta_i rhs_i + alpha ||beta|| + Re(rho)).
MultiplierBlocks add_multiplier_side(ConicProgram& prog, const RMat& coupling, const VarBlock& outer,
                                     const StrategySetSpec& set,
                                     const std::vector<DeterministicConstraint>& rows, double obj_sign) {
    const Index n = set.dim;
    MultiplierBlocks mb;
    mb.pinned = set.pins_imaginary();
    mb.parts = norm_parts(set);
    const Index nrows = mb.pinned ? n : 2 * n;

    mb.delta = prog.add_variables("delta", static_cast<Index>(rows.size()));
    mb.terms.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].norms.size(); ++j) {
            const auto& term = rows[i].norms[j];
            const std::string name = (term.mean_ellipsoid ? "eta" : "lambda") + std::to_string(i);
            mb.terms[i].push_back(prog.add_variables(name, term.factor.rows()));
        }
    }
    mb.beta = prog.add_variables("beta", mb.parts.count() * n);
    mb.beta_norm = prog.add_variables("beta_norm", mb.parts.count() > 0 ? 1 : 0);
    mb.rho = prog.add_variables("rho", mb.pinned ? 1 : 2);
    mb.r = prog.add_variables("r", n);

    AffineRows st(nrows);
    st.add_block(0, outer.offset, coupling.topRows(nrows));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Index d = mb.delta.offset + static_cast<Index>(i);
        for (Index c = 0; c < nrows; ++c) st.add(c, d, -rows[i].mean(c));
        for (std::size_t j = 0; j < rows[i].norms.size(); ++j) {
            const RMat ft = rows[i].norms[j].factor.transpose();
            st.add_block(0, mb.terms[i][j].offset, -ft.topRows(nrows));
        }
    }
    Index b = mb.beta.offset;
    if (mb.parts.real) {
        st.add_identity(0, b, n, -1.0);
        b += n;
    }
    if (mb.parts.imag) st.add_identity(n, b, n, -1.0);
    st.add_identity(0, mb.r.offset, n, 1.0);
    for (Index c = 0; c < n; ++c) st.add(c, mb.rho.offset, -1.0);
    if (!mb.pinned)
        for (Index c = 0; c < n; ++c) st.add(n + c, mb.rho.offset + 1, 1.0);
    prog.add_constraint("stationarity", ConeKind::Zero, std::move(st));

    if (!rows.empty()) {
        AffineRows nonneg(static_cast<Index>(rows.size()));
        nonneg.add_identity(0, mb.delta.offset, static_cast<Index>(rows.size()));
        prog.add_constraint("delta_nonneg", ConeKind::NonNeg, std::move(nonneg));
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Index d = mb.delta.offset + static_cast<Index>(i);
        prog.add_objective(d, obj_sign * rows[i].rhs);
        for (std::size_t j = 0; j < rows[i].norms.size(); ++j) {
            const VarBlock& m = mb.terms[i][j];
            AffineRows cone(1 + m.size);
            cone.add(0, d, rows[i].norms[j].scale);
            cone.add_identity(1, m.offset, m.size);
            prog.add_constraint(m.name + "_cone", ConeKind::SOC, std::move(cone));
        }
    }
    if (mb.parts.count() > 0) {
        AffineRows cone(1 + mb.beta.size);
        cone.add(0, mb.beta_norm.offset, 1.0);
        cone.add_identity(1, mb.beta.offset, mb.beta.size);
        prog.add_constraint("beta_cone", ConeKind::SOC, std::move(cone));
        prog.add_objective(mb.beta_norm.offset, obj_sign * set.alpha);
    }
    prog.add_objective(mb.rho.offset, obj_sign);
    AffineRows rpos(n);
    rpos.add_identity(0, mb.r.offset, n);
    prog.add_constraint("r_nonneg", ConeKind::NonNeg, std::move(rpos));
    return mb;
}

ConicProgram build_side(const GameSpec& game, Player inner) {
    const bool primal = inner == Player::One;
    const PlayerSpec& inner_spec = primal ? game.p1 : game.p2;
    const PlayerSpec& outer_spec = primal ? game.p2 : game.p1;
    const Player outer = primal ? Player::Two : Player::One;
    ConicProgram prog(primal ? Sense::Minimize : Sense::Maximize);
    const VarBlock z = prog.add_variables(primal ? "v" : "u", 2 * outer_spec.set.dim);
    const RMat phi = embed_mat(game.payoff);
    const RMat coupling = primal ? RMat(phi) : RMat(-phi.transpose());
    add_multiplier_side(prog, coupling, z, inner_spec.set, unified_rows(inner_spec, inner), primal ? 1.0 : -1.0);
    add_own_constraints(prog, z, outer_spec.set, unified_rows(outer_spec, outer), primal ? "v" : "u");
    return prog;
}

SideMultipliers extract_multipliers(const ConicProgram& prog, const ConicSolution& sol, const PlayerSpec& spec,
                                    Player player) {
    const Index n = spec.set.dim;
    const std::vector<DeterministicConstraint> rows = unified_rows(spec, player);
    const Index ndet = static_cast<Index>(spec.det_rows.size());
    const RVec delta = sol.value(prog, "delta");
    SideMultipliers m;
    m.lambda_det = delta.head(ndet);
    m.delta = delta.tail(delta.size() - ndet);
    const double eta_sign = player == Player::One ? 1.0 : -1.0;
    for (std::size_t i = static_cast<std::size_t>(ndet); i < rows.size(); ++i) {
        CVec lambda, eta;
        for (const auto& term : rows[i].norms) {
            const std::string name = (term.mean_ellipsoid ? "eta" : "lambda") + std::to_string(i);
            const CVec value = unembed_vec(sol.value(prog, name));
            if (term.mean_ellipsoid) eta = eta_sign * value;
            else lambda = value;
        }
        m.lambda.push_back(lambda);
        m.eta.push_back(eta);
    }
    const NormParts parts = norm_parts(spec.set);
    const RVec beta = sol.value(prog, "beta");
    m.beta = CVec::Zero(n);
    Index b = 0;
    if (parts.real) {
        m.beta.real() = beta.segment(b, n);
        b += n;
    }
    if (parts.imag) m.beta.imag() = beta.segment(b, n);
    const RVec rho = sol.value(prog, "rho");
    m.rho = Complex(rho(0), rho.size() > 1 ? rho(1) : 0.0);
    m.r = sol.value(prog, "r");
    return m;
}

void require_optimal(const ConicSolution& sol, const char* which) {
    if (sol.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::SolverFailure, std::string(which) + " program: " + std::string(to_string(sol.status)) +
                                                  " after " + std::to_string(sol.iterations) + " iterations");
    }
}

}  // namespace

MembershipReport membership(const CVec& z, const StrategySetSpec& set, double tol) {
    require_same_dims(z.size(), set.dim, "membership");
    MembershipReport r;
    r.min_real = z.real().minCoeff();
    r.sum_real_error = std::fabs(z.real().sum() - 1.0);
    r.sum_imag_error = std::fabs(z.imag().sum());
    r.norm = bounded_norm(set, z);
    r.max_violation = std::max({-r.min_real, r.norm - set.alpha, equality_violation(set, z)});
    r.feasible = r.max_violation <= tol;
    return r;
}

double player_violation(const PlayerSpec& spec, Player player, const CVec& z) {
    require_same_dims(z.size(), spec.set.dim, "player_violation");
    return std::max(inequality_violation(spec.set, unified_rows(spec, player), z), equality_violation(spec.set, z));
}

double slater_margin(const PlayerSpec& spec, Player player) {
    spec.set.validate();
    const std::vector<DeterministicConstraint> rows = unified_rows(spec, player);
    const Index n = spec.set.dim;
    const CVec uniform = CVec::Constant(n, Complex(1.0 / static_cast<double>(n), 0.0));
    const double quick = -inequality_violation(spec.set, rows, uniform);
    if (quick > 1e-9) return std::min(quick, 1.0);

    ConicProgram prog(Sense::Maximize);
    const VarBlock t = prog.add_variables("t", 1);
    const VarBlock z = prog.add_variables("z", 2 * n);
    prog.add_objective(t.offset, 1.0);
    AffineRows cap(1);
    cap.add_constant(0, 1.0).add(0, t.offset, -1.0);
    prog.add_constraint("cap", ConeKind::NonNeg, std::move(cap));
    add_own_constraints(prog, z, spec.set, rows, "z", t.offset);
    const ConicSolution sol = solve(prog);
    if (sol.status == SolveStatus::Infeasible) return -std::numeric_limits<double>::infinity();
    if (sol.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::SolverFailure, "Slater check: " + std::string(to_string(sol.status)));
    }
    return sol.objective;
}

ConicProgram build_primal(const GameSpec& game) {
    game.validate();
    return build_side(game, Player::One);
}

ConicProgram build_dual(const GameSpec& game) {
    game.validate();
    return build_side(game, Player::Two);
}

Equilibrium solve_game(const GameSpec& game, const GameSolveOptions& options) {
    game.validate();
    for (Player player : {Player::One, Player::Two}) {
        const double margin = slater_margin(player == Player::One ? game.p1 : game.p2, player);
        if (!(margin > 1e-9)) {
            throw Error(ErrorCode::SlaterViolated, std::string("player ") + (player == Player::One ? "1" : "2") +
                                                       " has no strictly feasible strategy (margin " +
                                                       std::to_string(margin) + ")");
        }
    }
    const ConicProgram primal = build_side(game, Player::One);
    const ConicProgram dual = build_side(game, Player::Two);
    const SolverOptions so{options.tol, 100};
    ConicSolution ps;
    ConicSolution ds;
    if (options.concurrent) {
        auto fut = std::async(std::launch::async, [&] { return solve(dual, so); });
        ps = solve(primal, so);
        ds = fut.get();
    } else {
        ps = solve(primal, so);
        ds = solve(dual, so);
    }
    require_optimal(ps, "primal");
    require_optimal(ds, "dual");

    Equilibrium eq;
    eq.primal_value = ps.objective;
    eq.dual_value = ds.objective;
    eq.value = 0.5 * (eq.primal_value + eq.dual_value);
    eq.duality_gap = eq.primal_value - eq.dual_value;
    if (std::fabs(eq.duality_gap) > options.gap_tol * (1.0 + std::fabs(eq.value))) {
        throw Error(ErrorCode::GapTooLarge, "duality gap " + std::to_string(eq.duality_gap));
    }
    eq.v_star = unembed_vec(ps.value(primal, "v"));
    eq.u_star = unembed_vec(ds.value(dual, "u"));
    eq.value_complex = eq.u_star.dot(game.payoff * eq.v_star);
    eq.p1 = extract_multipliers(primal, ps, game.p1, Player::One);
    eq.p2 = extract_multipliers(dual, ds, game.p2, Player::Two);
    eq.primal_residuals = ps.residuals;
    eq.dual_residuals = ds.residuals;
    eq.primal_iterations = ps.iterations;
    eq.dual_iterations = ds.iterations;
    return eq;
}

namespace {

CVec draw_candidate(const StrategySetSpec& set, std::mt19937_64& rng) {
    const Index n = set.dim;
    std::exponential_distribution<double> expo(1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    RVec re(n);
    for (Index i = 0; i < n; ++i) re(i) = expo(rng);
    re /= re.sum();
    RVec im = RVec::Zero(n);
    if (!set.pins_imaginary() && n > 1) {
        for (Index i = 0; i < n; ++i) im(i) = gauss(rng);
        im.array() -= im.mean();
        double radius = set.alpha;
        if (set.mode == NormMode::TotalNorm) radius = std::sqrt(std::max(0.0, set.alpha * set.alpha - re.squaredNorm()));
        const double norm = im.norm();
        if (norm > 0.0) im *= radius * unif(rng) / norm;
    }
    CVec z(n);
    z.real() = re;
    z.imag() = im;
    return z;
}

CVec sample_with_rows(const StrategySetSpec& set, const std::vector<DeterministicConstraint>& rows,
                      std::mt19937_64& rng, long max_attempts) {
    for (long attempt = 0; attempt < max_attempts; ++attempt) {
        CVec z = draw_candidate(set, rng);
        if (inequality_violation(set, rows, z) <= 0.0) return z;
    }
    throw Error(ErrorCode::SamplerStarvation,
                "no feasible strategy after " + std::to_string(max_attempts) + " attempts");
}

}  // namespace

CVec sample_strategy(const PlayerSpec& spec, Player player, std::mt19937_64& rng, long max_attempts) {
    spec.set.validate();
    return sample_with_rows(spec.set, unified_rows(spec, player), rng, max_attempts);
}

CertificationReport certify_saddle(const GameSpec& game, const Equilibrium& eq, int n_samples,
                                   std::uint64_t seed, double tol) {
    game.validate();
    require_same_dims(eq.u_star.size(), game.p1.set.dim, "certify u*");
    require_same_dims(eq.v_star.size(), game.p2.set.dim, "certify v*");
    const std::vector<DeterministicConstraint> rows1 = unified_rows(game.p1, Player::One);
    const std::vector<DeterministicConstraint> rows2 = unified_rows(game.p2, Player::Two);
    std::mt19937_64 rng(seed);
    const CVec av = game.payoff * eq.v_star;
    const CVec ahu = game.payoff.adjoint() * eq.u_star;

    CertificationReport rep;
    rep.performed = true;
    rep.samples = n_samples;
    rep.tol = tol;
    rep.max_violation_u = -std::numeric_limits<double>::infinity();
    rep.max_violation_v = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_samples; ++k) {
        const CVec u = sample_with_rows(game.p1.set, rows1, rng, 100000);
        const CVec v = sample_with_rows(game.p2.set, rows2, rng, 100000);
        const double gu = u.dot(av).real() - eq.value;   // player 1 should not gain
        const double gv = eq.value - ahu.dot(v).real();  // player 2 should not gain
        rep.max_violation_u = std::max(rep.max_violation_u, gu);
        rep.max_violation_v = std::max(rep.max_violation_v, gv);
        if (gu > tol) ++rep.violations;
        if (gv > tol) ++rep.violations;
    }
    rep.passed = rep.violations == 0;
    return rep;
}

}  // namespace cczsg
