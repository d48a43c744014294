#include "cczsg/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>

namespace cczsg {

namespace {

struct RowSampler {
    std::string id;
    Player player = Player::One;
    double mean = 0.0;
    double stddev = 0.0;
    double rhs = 0.0;
    QuantileFamily family;
    ConstraintCalibration info;

    bool violated(double draw) const {
        const double value = mean + stddev * draw;
        return player == Player::One ? value > rhs : value < rhs;
    }
};

void collect_rows(const PlayerSpec& spec, Player player, const CVec& z, const CalibrationOptions& options,
                  std::vector<RowSampler>& out) {
    const std::string prefix = player == Player::One ? "p1.c" : "p2.c";
    const std::vector<DeterministicConstraint> unified = unified_rows(spec, player);
    const std::size_t ndet = spec.det_rows.size();
    const RVec x = embed_vec(z);
    for (std::size_t i = 0; i < spec.chance_rows.size(); ++i) {
        const ChanceRow& row = spec.chance_rows[i];
        RowSampler s;
        s.id = prefix + std::to_string(i);
        s.player = player;
        const ProjectionMoments pm = projection_moments(row.moments, z);
        s.mean = pm.mean;
        s.stddev = std::sqrt(pm.variance);
        s.rhs = row.rhs;
        if (const auto* ces = std::get_if<CesModel>(&row.model)) {
            s.family = ces->family;
            s.info.exact = true;
        } else {
            if (!options.nominal) {
                throw Error(ErrorCode::UnsampleableModel,
                            s.id + ": model " + model_name(row.model) + " fixes no law; choose a nominal family");
            }
            s.family = *options.nominal;
            s.info.exact = false;
        }
        s.info.id = s.id;
        s.info.target = 1.0 - row.level;
        s.info.family = s.family.name();
        s.info.slack = unified[ndet + i].slack(x);
        out.push_back(std::move(s));
    }
}

template <class F>
void parallel_for(std::size_t count, const F& body) {
    const std::size_t workers = std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

void set_levels(PlayerSpec& spec, double p) {
    for (auto& row : spec.chance_rows) row.level = p;
}

std::string error_status(const Error& e) { return std::string(to_string(e.code())); }

}  // namespace

CalibrationReport calibrate(const GameSpec& game, const Equilibrium& eq, int scenarios, int trials,
                            std::uint64_t seed, const CalibrationOptions& options) {
    if (scenarios < 1 || trials < 1) throw Error(ErrorCode::Schema, "calibrate needs N >= 1 and T >= 1");
    game.validate();
    require_same_dims(eq.u_star.size(), game.p1.set.dim, "calibrate u*");
    require_same_dims(eq.v_star.size(), game.p2.set.dim, "calibrate v*");
    std::vector<RowSampler> rows;
    collect_rows(game.p1, Player::One, eq.u_star, options, rows);
    collect_rows(game.p2, Player::Two, eq.v_star, options, rows);

    const std::size_t nrows = rows.size();
    const auto ntrials = static_cast<std::size_t>(trials);
    // ratio[t][k]: share of violated scenarios of row k in trial t; the last two
    // columns hold the any-violated shares of player 1 and player 2.
    std::vector<std::vector<double>> ratio(ntrials, std::vector<double>(nrows + 2, 0.0));
    parallel_for(ntrials, [&](std::size_t t) {
        std::mt19937_64 rng(seed + t);
        std::vector<long> count(nrows + 2, 0);
        for (int s = 0; s < scenarios; ++s) {
            bool any1 = false;
            bool any2 = false;
            for (std::size_t k = 0; k < nrows; ++k) {
                const double x = draw_standard(rows[k].family, rng);
                if (!rows[k].violated(x)) continue;
                ++count[k];
                (rows[k].player == Player::One ? any1 : any2) = true;
            }
            count[nrows] += any1;
            count[nrows + 1] += any2;
        }
        for (std::size_t k = 0; k < nrows + 2; ++k) ratio[t][k] = static_cast<double>(count[k]) / scenarios;
    });

    CalibrationReport report;
    report.scenarios = scenarios;
    report.trials = trials;
    auto column_mean = [&](std::size_t k) {
        double sum = 0.0;
        for (std::size_t t = 0; t < ntrials; ++t) sum += ratio[t][k];
        return sum / static_cast<double>(ntrials);
    };
    for (std::size_t k = 0; k < nrows; ++k) {
        ConstraintCalibration c = rows[k].info;
        c.mean_ratio = column_mean(k);
        double ss = 0.0;
        c.max_ratio = 0.0;
        for (std::size_t t = 0; t < ntrials; ++t) {
            ss += (ratio[t][k] - c.mean_ratio) * (ratio[t][k] - c.mean_ratio);
            c.max_ratio = std::max(c.max_ratio, ratio[t][k]);
        }
        c.std_ratio = ntrials > 1 ? std::sqrt(ss / static_cast<double>(ntrials - 1)) : 0.0;
        report.rows.push_back(std::move(c));
    }
    report.any_violation_p1 = column_mean(nrows);
    report.any_violation_p2 = column_mean(nrows + 1);
    return report;
}

std::vector<SweepPRow> sweep_p(const GameSpec& game, const std::vector<double>& grid, SweepTarget target,
                               const GameSolveOptions& options) {
    std::vector<SweepPRow> rows(grid.size());
    GameSolveOptions inner = options;
    inner.concurrent = false;
    parallel_for(grid.size(), [&](std::size_t i) {
        SweepPRow& row = rows[i];
        row.p = grid[i];
        GameSpec g = game;
        if (target != SweepTarget::Player2) set_levels(g.p1, grid[i]);
        if (target != SweepTarget::Player1) set_levels(g.p2, grid[i]);
        const auto start = std::chrono::steady_clock::now();
        try {
            const Equilibrium eq = solve_game(g, inner);
            row.ok = true;
            row.value = eq.value;
            row.gap = eq.duality_gap;
            row.status = "optimal";
        } catch (const Error& e) {
            row.status = error_status(e);
            row.message = e.what();
        }
        row.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    return rows;
}

int saturation_index(const std::vector<SweepAlphaRow>& rows, double tol) {
    const int n = static_cast<int>(rows.size());
    int index = -1;
    for (int i = n - 2; i >= 0; --i) {
        if (!rows[i].ok || !rows[i + 1].ok || std::fabs(rows[i + 1].value - rows[i].value) >= tol) break;
        index = i;
    }
    return index;
}

SweepAlphaTable sweep_alpha(const GameSpec& game, const std::vector<double>& grid, std::optional<double> p,
                            const GameSolveOptions& options) {
    if (!std::is_sorted(grid.begin(), grid.end())) {
        throw Error(ErrorCode::Schema, "alpha grid must be sorted ascending");
    }
    SweepAlphaTable table;
    table.rows.resize(grid.size());
    GameSolveOptions inner = options;
    inner.concurrent = false;
    parallel_for(grid.size(), [&](std::size_t i) {
        SweepAlphaRow& row = table.rows[i];
        row.alpha = grid[i];
        GameSpec g = game;
        g.p1.set.alpha = grid[i];
        g.p2.set.alpha = grid[i];
        if (p) {
            set_levels(g.p1, *p);
            set_levels(g.p2, *p);
        }
        try {
            const Equilibrium eq = solve_game(g, inner);
            row.ok = true;
            row.re_u_norm = eq.u_star.real().norm();
            row.re_v_norm = eq.v_star.real().norm();
            row.value = eq.value;
            row.status = "optimal";
        } catch (const Error& e) {
            row.status = e.code() == ErrorCode::EmptyStrategySet ? "infeasible" : error_status(e);
            row.message = e.what();
        }
    });
    table.saturation_index = saturation_index(table.rows);
    return table;
}

namespace {

std::ostream& csv_stream(std::ostream& os) {
    os.precision(12);
    return os;
}

}  // namespace

void write_calibration_csv(std::ostream& os, const CalibrationReport& report) {
    csv_stream(os) << "constraint_id,target,mean_ratio,std_ratio,max_ratio\n";
    for (const auto& r : report.rows) {
        os << r.id << ',' << r.target << ',' << r.mean_ratio << ',' << r.std_ratio << ',' << r.max_ratio << '\n';
    }
}

void write_sweep_p_csv(std::ostream& os, const std::vector<SweepPRow>& rows) {
    csv_stream(os) << "p,value,gap,solve_time,status\n";
    for (const auto& r : rows) {
        os << r.p << ',';
        if (r.ok) os << r.value << ',' << r.gap;
        else os << ',';
        os << ',' << r.solve_seconds << ',' << r.status << '\n';
    }
}

void write_sweep_alpha_csv(std::ostream& os, const SweepAlphaTable& table) {
    csv_stream(os) << "alpha,re_u_norm,re_v_norm,value,status,saturated\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        os << r.alpha << ',';
        if (r.ok) os << r.re_u_norm << ',' << r.re_v_norm << ',' << r.value;
        else os << ",,";
        const bool saturated = table.saturation_index >= 0 && static_cast<int>(i) >= table.saturation_index;
        os << ',' << r.status << ',' << (saturated ? 1 : 0) << '\n';
    }
}

}  // namespace cczsg
