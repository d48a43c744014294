#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cczsg/instances.hpp"
#include "cczsg/montecarlo.hpp"

using namespace cczsg;

namespace {

InstanceRecipe small_recipe(std::uint64_t seed, const std::string& model = "ces:gaussian", double p = 0.95) {
    InstanceRecipe r;
    r.n = 6;
    r.m = 6;
    r.l = 3;
    r.lc = 3;
    r.q = 3;
    r.qc = 3;
    r.p1 = p;
    r.p2 = p;
    r.margin = 0.02;
    r.model = ModelChoice::parse(model);
    r.seed = seed;
    return r;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("active Gaussian rows are violated at the nominal rate") {
    int active = 0;
    for (std::uint64_t seed = 1; seed <= 20 && active < 3; ++seed) {
        const GameSpec g = gen_instance(small_recipe(seed));
        const Equilibrium eq = solve_game(g);
        const CalibrationReport rep = calibrate(g, eq, 10000, 10, 100 + seed);
        CHECK(rep.scenarios == 10000);
        CHECK(rep.trials == 10);
        REQUIRE(rep.rows.size() == 6);
        for (const auto& row : rep.rows) {
            CHECK(row.exact);
            CHECK(row.target == doctest::Approx(0.05));
            CHECK(row.max_ratio >= row.mean_ratio);
            if (row.slack <= 1e-7) {
                ++active;
                CHECK(std::fabs(row.mean_ratio - 0.05) <= 0.007);
            } else if (row.slack >= 0.5) {
                CHECK(row.mean_ratio <= 1e-3);
            }
        }
    }
    CHECK(active >= 1);
}

TEST_CASE("inactive rows are never violated") {
    InstanceRecipe r = small_recipe(3);
    r.margin = 50.0;  // enormous slack everywhere
    const GameSpec g = gen_instance(r);
    const Equilibrium eq = solve_game(g);
    const CalibrationReport rep = calibrate(g, eq, 2000, 2, 5);
    for (const auto& row : rep.rows) CHECK(row.mean_ratio == 0.0);
    CHECK(rep.any_violation_p1 == 0.0);
    CHECK(rep.any_violation_p2 == 0.0);
}

TEST_CASE("moment-ambiguity rows are conservative under the nominal family") {
    for (const char* model : {"known", "unknown-cov", "unknown-moments:0.1"}) {
        CAPTURE(model);
        const GameSpec g = gen_instance(small_recipe(7, model, 0.8));
        const Equilibrium eq = solve_game(g);
        const CalibrationReport rep = calibrate(g, eq, 10000, 10, 9);
        const double sigma = std::sqrt(0.2 * 0.8 / 10000.0);
        for (const auto& row : rep.rows) {
            CHECK_FALSE(row.exact);
            CHECK(row.family == "gaussian");
            CHECK(row.mean_ratio <= 0.2 + 3 * sigma);
        }
        CalibrationOptions none;
        none.nominal.reset();
        try {
            calibrate(g, eq, 10, 1, 9, none);
            FAIL("expected UnsampleableModel");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnsampleableModel);
        }
    }
}

TEST_CASE("calibration is reproducible") {
    const GameSpec g = gen_instance(small_recipe(11));
    const Equilibrium eq = solve_game(g);
    const CalibrationReport a = calibrate(g, eq, 500, 3, 42);
    const CalibrationReport b = calibrate(g, eq, 500, 3, 42);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].id == b.rows[i].id);
        CHECK(a.rows[i].mean_ratio == b.rows[i].mean_ratio);
        CHECK(a.rows[i].std_ratio == b.rows[i].std_ratio);
    }
    CHECK(a.rows.front().id == "p1.c0");
    CHECK(a.rows.back().id == "p2.c2");
    CHECK_THROWS_AS(calibrate(g, eq, 0, 3, 42), Error);
}

TEST_CASE("sweep over chance levels") {
    InstanceRecipe r = small_recipe(13);
    r.margin_level = 0.95;
    const GameSpec g = gen_instance(r);
    CHECK(sweep_p(g, {}).empty());

    const auto near_half = sweep_p(g, {0.5 + 1e-6});
    REQUIRE(near_half.size() == 1);
    CHECK(near_half[0].ok);
    CHECK(near_half[0].status == "optimal");

    const auto rows = sweep_p(g, {0.6, 0.7, 0.8, 0.9, 0.95}, SweepTarget::Player1);
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].ok);
        CHECK(rows[i].gap <= 1e-5 * (1 + std::fabs(rows[i].value)));
        if (i > 0) CHECK(rows[i].value <= rows[i - 1].value + 1e-6);
    }
    const auto p2_rows = sweep_p(g, {0.6, 0.95}, SweepTarget::Player2);
    REQUIRE(p2_rows.size() == 2);
    CHECK(p2_rows[1].value >= p2_rows[0].value - 1e-6);

    // Levels outside (0.5, 1) are recorded, not thrown.
    const auto bad = sweep_p(g, {0.3});
    REQUIRE(bad.size() == 1);
    CHECK_FALSE(bad[0].ok);
    CHECK(bad[0].status != "optimal");
}

TEST_CASE("sweep over the modulus bound") {
    InstanceRecipe r = small_recipe(17);
    r.n = r.m = 4;
    const GameSpec g = gen_instance(r);
    const SweepAlphaTable t = sweep_alpha(g, {0.3, 1.0, 2.0, 4.0, 8.0});
    REQUIRE(t.rows.size() == 5);
    CHECK_FALSE(t.rows[0].ok);  // 0.3 < 1/sqrt(4)
    CHECK(t.rows[0].status == "infeasible");
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        REQUIRE(t.rows[i].ok);
        CHECK(t.rows[i].re_u_norm <= t.rows[i].alpha + 1e-6);
        CHECK(t.rows[i].re_v_norm <= t.rows[i].alpha + 1e-6);
    }
    // Strategies live in a bounded polytope, so the value eventually stops moving.
    CHECK(t.saturation_index >= 1);
    CHECK(t.saturation_index == saturation_index(t.rows));
    CHECK_THROWS_AS(sweep_alpha(g, {2.0, 1.0}), Error);
}

TEST_CASE("saturation index") {
    std::vector<SweepAlphaRow> rows(4);
    const double values[] = {1.0, 2.0, 2.0 + 1e-8, 2.0 + 2e-8};
    for (int i = 0; i < 4; ++i) {
        rows[i].ok = true;
        rows[i].value = values[i];
    }
    CHECK(saturation_index(rows) == 1);
    rows[3].value = 3.0;
    CHECK(saturation_index(rows) == -1);
}

TEST_CASE("CSV headers") {
    std::ostringstream a, b, c;
    write_calibration_csv(a, CalibrationReport{});
    write_sweep_p_csv(b, {});
    write_sweep_alpha_csv(c, SweepAlphaTable{});
    CHECK(first_line(a.str()) == "constraint_id,target,mean_ratio,std_ratio,max_ratio");
    CHECK(first_line(b.str()) == "p,value,gap,solve_time,status");
    CHECK(first_line(c.str()) == "alpha,re_u_norm,re_v_norm,value,status,saturated");
}
