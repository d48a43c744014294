#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cczsg/games.hpp"

namespace cczsg {

struct ConstraintCalibration {
    std::string id;        // "p1.c0", "p2.c1", ...
    double target = 0.0;   // 1 - p
    double mean_ratio = 0.0;
    double std_ratio = 0.0;
    double max_ratio = 0.0;
    double slack = 0.0;    // deterministic-constraint slack at the equilibrium strategy
    bool exact = true;     // false for moment-ambiguity rows sampled under the nominal family
    std::string family;    // law the projections were drawn from
};

struct CalibrationReport {
    int scenarios = 0;
    int trials = 0;
    std::vector<ConstraintCalibration> rows;
    double any_violation_p1 = 0.0;  // mean over trials of the share of scenarios violating any player-1 row
    double any_violation_p2 = 0.0;
};

struct CalibrationOptions {
    /// Law used for moment-ambiguity rows; empty makes such rows an UnsampleableModel error.
    std::optional<QuantileFamily> nominal = QuantileFamily::gaussian();
};

/// Empirical violation rates of every chance row at the equilibrium strategies:
/// T trials of N i.i.d. scenarios, trial t seeded with seed + t.
CalibrationReport calibrate(const GameSpec& game, const Equilibrium& eq, int scenarios, int trials,
                            std::uint64_t seed, const CalibrationOptions& options = {});

enum class SweepTarget { Both, Player1, Player2 };

struct SweepPRow {
    double p = 0.0;
    bool ok = false;
    double value = 0.0;
    double gap = 0.0;
    double solve_seconds = 0.0;
    std::string status;  // "optimal" or the error code
    std::string message;
};

/// Re-solves the game with the chance levels of the targeted player(s) set to each p.
std::vector<SweepPRow> sweep_p(const GameSpec& game, const std::vector<double>& grid,
                               SweepTarget target = SweepTarget::Both,
                               const GameSolveOptions& options = {});

struct SweepAlphaRow {
    double alpha = 0.0;
    bool ok = false;
    double re_u_norm = 0.0;
    double re_v_norm = 0.0;
    double value = 0.0;
    std::string status;
    std::string message;
};

struct SweepAlphaTable {
    std::vector<SweepAlphaRow> rows;
    /// First index after which every successive value change is below 1e-6; -1 if none.
    int saturation_index = -1;
};

/// Re-solves with alpha1 = alpha2 = alpha over an ascending grid; when p is given
/// every chance level is set to p as well.
SweepAlphaTable sweep_alpha(const GameSpec& game, const std::vector<double>& grid,
                            std::optional<double> p = std::nullopt, const GameSolveOptions& options = {});

int saturation_index(const std::vector<SweepAlphaRow>& rows, double tol = 1e-6);

void write_calibration_csv(std::ostream& os, const CalibrationReport& report);
void write_sweep_p_csv(std::ostream& os, const std::vector<SweepPRow>& rows);
void write_sweep_alpha_csv(std::ostream& os, const SweepAlphaTable& table);

}  // namespace cczsg
