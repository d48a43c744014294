#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cczsg/io.hpp"

namespace {

using namespace cczsg;

/// Reads --config files written as JSON: top-level scalars apply to every
/// subcommand, nested objects keyed by a subcommand name apply to it alone.
class JsonConfig : public CLI::Config {
public:
    explicit JsonConfig(std::vector<std::string> subcommands) : subcommands_(std::move(subcommands)) {}

    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        Json j;
        try {
            j = Json::parse(input);
        } catch (const Json::parse_error& e) {
            throw CLI::ConversionError(std::string("config: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config: expected a JSON object");
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                for (const auto& [inner, v] : value.items()) items.push_back(item({key}, inner, v));
            } else {
                for (const auto& sub : subcommands_) items.push_back(item({sub}, key, value));
            }
        }
        return items;
    }

private:
    static CLI::ConfigItem item(std::vector<std::string> parents, const std::string& name, const Json& value) {
        CLI::ConfigItem it;
        it.parents = std::move(parents);
        it.name = name;
        auto text = [](const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (value.is_array()) {
            for (const auto& v : value) it.inputs.push_back(text(v));
        } else {
            it.inputs.push_back(text(value));
        }
        return it;
    }

    std::vector<std::string> subcommands_;
};

struct Common {
    std::string in = "-";
    std::string out = "-";
    std::uint64_t seed = 1;
    std::optional<double> tol;
    std::optional<double> p;
    std::optional<double> alpha;
    std::string mode;
};

struct Options {
    Common common;
    // gen
    Eigen::Index n = 10, l = 5, lc = 2, m = 10, q = 5, qc = 2;
    std::string model = "ces:gaussian";
    std::optional<double> p1, p2;
    double margin = 0.1;
    // certify
    std::string eq_path;
    int samples = 1000;
    // calibrate
    int scenarios = 100;
    int trials = 10;
    std::string nominal = "gaussian";
    // sweeps
    std::vector<double> p_grid;
    std::vector<double> alpha_grid;
    std::string target = "both";
    // txjam
    bool project = false;
};

NormMode parse_mode(const std::string& text) {
    if (text == "total") return NormMode::TotalNorm;
    if (text == "imag") return NormMode::ImagNorm;
    throw Error(ErrorCode::Schema, "mode must be 'total' or 'imag'");
}

GameSolveOptions solve_options(const Common& c) {
    GameSolveOptions o;
    if (c.tol) o.tol = *c.tol;
    return o;
}

GameSpec load_game(const Common& c) {
    GameSpec g = game_from_json(read_json(c.in));
    for (PlayerSpec* player : {&g.p1, &g.p2}) {
        if (c.p) {
            for (auto& row : player->chance_rows) row.level = *c.p;
        }
        if (c.alpha) player->set.alpha = *c.alpha;
        if (!c.mode.empty()) player->set.mode = parse_mode(c.mode);
    }
    g.validate();
    return g;
}

/// Summary lines go to standard output unless the report itself does.
std::ostream& summary_stream(const Common& c) { return c.out == "-" ? std::cerr : std::cout; }

Equilibrium solve_or_load(const Options& o, const GameSpec& game) {
    if (!o.eq_path.empty()) {
        Equilibrium eq = equilibrium_from_json(read_json(o.eq_path));
        require_same_dims(eq.u_star.size(), game.p1.set.dim, "equilibrium u*");
        require_same_dims(eq.v_star.size(), game.p2.set.dim, "equilibrium v*");
        return eq;
    }
    return solve_game(game, solve_options(o.common));
}

int run_solve(const Options& o) {
    const GameSpec game = load_game(o.common);
    const Equilibrium eq = solve_game(game, solve_options(o.common));
    write_text(o.common.out, to_json(eq).dump(2));
    summary_stream(o.common) << "status optimal value " << eq.value << " gap " << eq.duality_gap << '\n';
    return 0;
}

int run_certify(const Options& o) {
    const GameSpec game = load_game(o.common);
    Equilibrium eq = solve_or_load(o, game);
    eq.certification = certify_saddle(game, eq, o.samples, derive_seed(o.common.seed, "certify"));
    write_text(o.common.out, to_json(eq).dump(2));
    const auto& c = eq.certification;
    summary_stream(o.common) << "status " << (c.passed ? "certified" : "certification_failed") << " value " << eq.value
                             << " gap " << eq.duality_gap << " samples " << c.samples << " violations "
                             << c.violations << '\n';
    return c.passed ? 0 : 1;
}

std::optional<QuantileFamily> parse_nominal(const std::string& text) {
    if (text == "none") return std::nullopt;
    const ModelChoice m = ModelChoice::parse("ces:" + text);
    return m.family;
}

int run_calibrate(const Options& o) {
    const GameSpec game = load_game(o.common);
    const Equilibrium eq = solve_or_load(o, game);
    CalibrationOptions opts;
    opts.nominal = parse_nominal(o.nominal);
    const CalibrationReport report =
        calibrate(game, eq, o.scenarios, o.trials, derive_seed(o.common.seed, "calibrate"), opts);
    std::ostringstream csv;
    write_calibration_csv(csv, report);
    write_text(o.common.out, csv.str());
    summary_stream(o.common) << "status optimal value " << eq.value << " gap " << eq.duality_gap
                             << " any_violation_p1 " << report.any_violation_p1 << " any_violation_p2 "
                             << report.any_violation_p2 << '\n';
    return 0;
}

int run_sweep_p(const Options& o) {
    const GameSpec game = load_game(o.common);
    SweepTarget target = SweepTarget::Both;
    if (o.target == "p1") target = SweepTarget::Player1;
    else if (o.target == "p2") target = SweepTarget::Player2;
    else if (o.target != "both") throw Error(ErrorCode::Schema, "target must be both, p1 or p2");
    const auto rows = sweep_p(game, o.p_grid, target, solve_options(o.common));
    std::ostringstream csv;
    write_sweep_p_csv(csv, rows);
    write_text(o.common.out, csv.str());
    int failed = 0;
    for (const auto& r : rows) failed += r.ok ? 0 : 1;
    summary_stream(o.common) << "status " << (failed ? "partial" : "optimal") << " rows " << rows.size()
                             << " failed " << failed << '\n';
    return 0;
}

int run_sweep_alpha(const Options& o) {
    Common c = o.common;
    c.alpha.reset();  // the grid sets alpha
    const GameSpec game = load_game(c);
    const SweepAlphaTable table = sweep_alpha(game, o.alpha_grid, o.common.p, solve_options(o.common));
    std::ostringstream csv;
    write_sweep_alpha_csv(csv, table);
    write_text(o.common.out, csv.str());
    summary_stream(o.common) << "status optimal rows " << table.rows.size() << " saturation_index "
                             << table.saturation_index << '\n';
    return 0;
}

int run_txjam(const Options& o) {
    WaveformSet tx, jam;
    bool project = o.project;
    if (o.common.in.empty()) {
        tx = worked_example_transmitters();
        jam = worked_example_jammers();
        project = true;  // the built-in waveforms are rounded to three or four decimals
    } else {
        std::tie(tx, jam) = waveforms_from_json(read_json(o.common.in));
    }
    if (project) {
        tx = tx.project_to_constant_modulus();
        jam = jam.project_to_constant_modulus();
    }
    GameSpec game;
    game.payoff = txjam_payoff(tx, jam);
    const double alpha = o.common.alpha.value_or(0.5);
    const NormMode mode = o.common.mode.empty() ? NormMode::ImagNorm : parse_mode(o.common.mode);
    game.p1.set = {game.payoff.rows(), alpha, mode, false};
    game.p2.set = {game.payoff.cols(), alpha, mode, false};
    game.validate();
    write_text(o.common.out, to_json(game).dump(2));
    auto& s = summary_stream(o.common);
    s << "payoff";
    for (Eigen::Index i = 0; i < game.payoff.rows(); ++i)
        for (Eigen::Index j = 0; j < game.payoff.cols(); ++j)
            s << ' ' << game.payoff(i, j).real() << (game.payoff(i, j).imag() < 0 ? "" : "+") << game.payoff(i, j).imag()
              << 'i';
    s << '\n';
    return 0;
}

int run_gen(const Options& o) {
    InstanceRecipe r;
    r.n = o.n;
    r.l = o.l;
    r.lc = o.lc;
    r.m = o.m;
    r.q = o.q;
    r.qc = o.qc;
    r.model = ModelChoice::parse(o.model);
    r.p1 = o.p1.value_or(o.common.p.value_or(0.9));
    r.p2 = o.p2.value_or(o.common.p.value_or(0.9));
    r.margin = o.margin;
    r.alpha = o.common.alpha.value_or(1.0);
    r.mode = o.common.mode.empty() ? NormMode::TotalNorm : parse_mode(o.common.mode);
    r.seed = derive_seed(o.common.seed, "gen");
    const GameSpec game = gen_instance(r);
    write_text(o.common.out, to_json(game).dump(2));
    summary_stream(o.common) << "status generated n " << r.n << " m " << r.m << " model " << r.model.to_string() << '\n';
    return 0;
}

void add_common(CLI::App* sub, Common& c, bool needs_input) {
    if (needs_input) sub->add_option("--in", c.in, "Input JSON path, '-' for standard input")->capture_default_str();
    sub->add_option("--out", c.out, "Output path, '-' for standard output")->capture_default_str();
    sub->add_option("--seed", c.seed, "Seed fanned out to every random subsystem")->capture_default_str();
    sub->add_option("--tol", c.tol, "Conic solver tolerance (default CCZSG_SOLVER_TOL or 1e-8)");
    sub->add_option("--p", c.p, "Confidence level applied to every chance row");
    sub->add_option("--alpha", c.alpha, "Norm bound of both strategy sets");
    sub->add_option("--mode", c.mode, "Norm mode of both strategy sets")->check(CLI::IsMember({"total", "imag"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chance-constrained zero-sum games with complex payoffs"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    std::string chosen;

    const std::vector<std::string> names = {"solve", "certify", "calibrate", "sweep-p", "sweep-alpha", "txjam", "gen"};
    app.config_formatter(std::make_shared<JsonConfig>(names));
    app.set_config("--config", "", "JSON file of flag values (flags on the command line take precedence)");
    app.allow_config_extras(CLI::config_extras_mode::ignore);

    auto* solve = app.add_subcommand("solve", "Solve a game and write the equilibrium report");
    add_common(solve, o.common, true);

    auto* certify = app.add_subcommand("certify", "Solve (or load) and check the saddle inequalities by sampling");
    add_common(certify, o.common, true);
    certify->add_option("--eq", o.eq_path, "Equilibrium report to certify instead of solving");
    certify->add_option("--samples", o.samples, "Sampled strategies per player")->capture_default_str();

    auto* calib = app.add_subcommand("calibrate", "Monte-Carlo violation rates of the chance rows at equilibrium");
    add_common(calib, o.common, true);
    calib->add_option("--eq", o.eq_path, "Equilibrium report to use instead of solving");
    calib->add_option("--scenarios", o.scenarios, "Scenarios per trial")->capture_default_str();
    calib->add_option("--trials", o.trials, "Independent trials")->capture_default_str();
    calib->add_option("--nominal", o.nominal, "Law for moment-ambiguity rows (family name or 'none')")
        ->capture_default_str();

    auto* sweep_p_cmd = app.add_subcommand("sweep-p", "Re-solve over a grid of confidence levels");
    add_common(sweep_p_cmd, o.common, true);
    sweep_p_cmd->add_option("--p-grid", o.p_grid, "Comma-separated levels")->delimiter(',')->required();
    sweep_p_cmd->add_option("--target", o.target, "Player whose levels move")
        ->check(CLI::IsMember({"both", "p1", "p2"}))
        ->capture_default_str();

    auto* sweep_a = app.add_subcommand("sweep-alpha", "Re-solve over an ascending grid of norm bounds");
    add_common(sweep_a, o.common, true);
    sweep_a->add_option("--alpha-grid", o.alpha_grid, "Comma-separated ascending bounds")->delimiter(',')->required();

    auto* txjam = app.add_subcommand("txjam", "Build the transmitter-jammer game from waveforms");
    o.common.in.clear();
    add_common(txjam, o.common, false);
    txjam->add_option("--in", o.common.in, "Waveform JSON (default: built-in worked example)");
    txjam->add_flag("--project", o.project, "Reset every sample to modulus 1/sqrt(N) before validation");

    auto* gen = app.add_subcommand("gen", "Generate a seeded random game");
    add_common(gen, o.common, false);
    gen->add_option("--n", o.n, "Player 1 dimension")->capture_default_str();
    gen->add_option("--l", o.l, "Player 1 rows")->capture_default_str();
    gen->add_option("--lc", o.lc, "Player 1 chance rows")->capture_default_str();
    gen->add_option("--m", o.m, "Player 2 dimension")->capture_default_str();
    gen->add_option("--q", o.q, "Player 2 rows")->capture_default_str();
    gen->add_option("--qc", o.qc, "Player 2 chance rows")->capture_default_str();
    gen->add_option("--model", o.model,
                    "ces:gaussian|ces:laplace|ces:logistic|ces:cauchy|ces:t:<nu>|known|unknown-cov|unknown-moments:<zeta>")
        ->capture_default_str();
    gen->add_option("--p1", o.p1, "Player 1 level (overrides --p)");
    gen->add_option("--p2", o.p2, "Player 2 level (overrides --p)");
    gen->add_option("--margin", o.margin, "Slack of the uniform strategy in every row")->capture_default_str();

    for (auto* sub : app.get_subcommands({})) {
        sub->allow_config_extras(CLI::config_extras_mode::ignore);
        sub->callback([sub, &chosen] { chosen = sub->get_name(); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (chosen == "solve") return run_solve(o);
        if (chosen == "certify") return run_certify(o);
        if (chosen == "calibrate") return run_calibrate(o);
        if (chosen == "sweep-p") return run_sweep_p(o);
        if (chosen == "sweep-alpha") return run_sweep_alpha(o);
        if (chosen == "txjam") return run_txjam(o);
        if (chosen == "gen") return run_gen(o);
    } catch (const Error& e) {
        std::cerr << error_json(e).dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << error_json(Error(ErrorCode::Io, e.what())).dump() << '\n';
        return 1;
    }
    std::cerr << app.help();
    return 2;
}
