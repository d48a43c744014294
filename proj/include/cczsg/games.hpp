#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cczsg/conic.hpp"
#include "cczsg/reformulate.hpp"

namespace cczsg {

enum class NormMode { TotalNorm, ImagNorm };

std::string_view to_string(NormMode mode);

/// {z : Re(z) >= 0, sum z = 1, ||z|| <= alpha (TotalNorm) or ||Im z|| <= alpha (ImagNorm)}.
/// `real_only` additionally pins Im(z) = 0, which recovers the real simplex.
struct StrategySetSpec {
    Eigen::Index dim = 0;
    double alpha = 1.0;
    NormMode mode = NormMode::ImagNorm;
    bool real_only = false;

    /// Throws EmptyStrategySet when no strategy can satisfy the norm bound.
    void validate() const;
    /// Im(z) is forced to zero, either explicitly or by a zero ImagNorm bound.
    bool pins_imaginary() const { return real_only || (mode == NormMode::ImagNorm && alpha == 0.0); }
};

/// Deterministic row Re(coef . z) <= rhs for player 1, Re(coef . z) >= rhs for player 2.
struct DetRow {
    CVec coef;
    double rhs = 0.0;
};

/// Strategy set of one player. Chance rows read P[Re(B u) <= b] >= p for
/// player 1 and P[Re(D v) >= d] >= p for player 2.
struct PlayerSpec {
    StrategySetSpec set;
    std::vector<DetRow> det_rows;
    std::vector<ChanceRow> chance_rows;
};

/// max over u in S1 of min over v in S2 of Re(u^H A v).
struct GameSpec {
    CMat payoff;
    PlayerSpec p1;
    PlayerSpec p2;

    void validate() const;
};

enum class Player { One, Two };

/// Every constraint of a player as mean^T phi1(z) + sum scale ||F phi1(z)|| <= rhs:
/// deterministic rows first, then chance rows.
std::vector<DeterministicConstraint> unified_rows(const PlayerSpec& spec, Player player);

struct MembershipReport {
    bool feasible = false;
    double min_real = 0.0;
    double sum_real_error = 0.0;
    double sum_imag_error = 0.0;
    double norm = 0.0;  // ||z|| or ||Im z|| depending on the mode
    double max_violation = 0.0;
};

MembershipReport membership(const CVec& z, const StrategySetSpec& set, double tol = 1e-7);

/// Largest violation of the strategy set and all rows of the player (<= 0 when feasible).
double player_violation(const PlayerSpec& spec, Player player, const CVec& z);

/// Largest t such that some strategy satisfies every inequality with slack t
/// (capped at 1). Slater's condition holds iff the result is positive.
double slater_margin(const PlayerSpec& spec, Player player);

/// Program over v and player 1's multipliers (minimization).
ConicProgram build_primal(const GameSpec& game);
/// Program over u and player 2's multipliers (maximization).
ConicProgram build_dual(const GameSpec& game);

struct SideMultipliers {
    RVec lambda_det;             // deterministic rows
    RVec delta;                  // chance rows
    std::vector<CVec> lambda;    // dispersion cone multiplier per chance row (empty when linear)
    std::vector<CVec> eta;       // mean-ellipsoid multiplier per chance row (empty unless unknown moments)
    CVec beta;
    Complex rho;
    RVec r;
};

struct CertificationReport {
    bool performed = false;
    int samples = 0;
    double tol = 0.0;
    double max_violation_u = 0.0;  // max of Re(u^H A v*) - value over sampled u
    double max_violation_v = 0.0;  // max of value - Re(u*^H A v) over sampled v
    int violations = 0;
    bool passed = false;
};

struct Equilibrium {
    CVec u_star;
    CVec v_star;
    double value = 0.0;
    Complex value_complex;
    double primal_value = 0.0;
    double dual_value = 0.0;
    double duality_gap = 0.0;
    SideMultipliers p1;
    SideMultipliers p2;
    ResidualReport primal_residuals;
    ResidualReport dual_residuals;
    int primal_iterations = 0;
    int dual_iterations = 0;
    CertificationReport certification;
};

struct GameSolveOptions {
    double tol = default_solver_tolerance();
    double gap_tol = 1e-5;   // relative to 1 + |value|
    bool concurrent = true;  // solve the two programs on separate threads
};

Equilibrium solve_game(const GameSpec& game, const GameSolveOptions& options = {});

/// Samples feasible strategies for both players and checks the saddle inequalities.
CertificationReport certify_saddle(const GameSpec& game, const Equilibrium& eq, int n_samples,
                                   std::uint64_t seed, double tol = 1e-7);

/// Rejection sampler over a player's full strategy set.
CVec sample_strategy(const PlayerSpec& spec, Player player, std::mt19937_64& rng,
                     long max_attempts = 100000);

}  // namespace cczsg
