#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cczsg/games.hpp"

namespace cczsg {

/// Complex sequences of a common length N with constant modulus 1/sqrt(N).
struct WaveformSet {
    std::vector<CVec> waveforms;
    std::vector<std::string> labels;

    Eigen::Index length() const { return waveforms.empty() ? 0 : waveforms.front().size(); }

    /// Throws LengthMismatch or ModulusViolation.
    void validate(double modulus_tol = 1e-6) const;

    /// Keeps every phase and resets every modulus to exactly 1/sqrt(N).
    WaveformSet project_to_constant_modulus() const;
};

/// A_ij = T_i^H J_j, the jammer's matched-filter output at zero lag.
CMat txjam_payoff(const WaveformSet& tx, const WaveformSet& jam, double modulus_tol = 1e-6);

/// The two transmitter and two jammer waveforms (N = 6) of the worked example, as tabulated
/// (entries rounded to three or four decimals).
WaveformSet worked_example_transmitters();
WaveformSet worked_example_jammers();

/// The reference payoff matrix of the worked example.
CMat worked_example_payoff();

/// Model choice for generated chance rows, parsed from
/// ces:gaussian | ces:laplace | ces:logistic | ces:cauchy | ces:t:<nu> | known | unknown-cov | unknown-moments:<zeta>.
struct ModelChoice {
    enum class Kind { Ces, Known, UnknownCov, UnknownMoments };
    Kind kind = Kind::Ces;
    QuantileFamily family = QuantileFamily::gaussian();
    double zeta = 0.0;

    static ModelChoice parse(std::string_view text);
    std::string to_string() const;
    /// Concrete ambiguity model for a row with the given moments.
    AmbiguityModel instantiate(const ComplexMoments& moments) const;
};

struct InstanceRecipe {
    Eigen::Index n = 10, l = 5, lc = 2;  // player 1: dimension, rows, of which chance rows
    Eigen::Index m = 10, q = 5, qc = 2;  // player 2
    ModelChoice model;
    double p1 = 0.9;
    double p2 = 0.9;
    /// Level at which the right-hand sides give the uniform strategy its margin;
    /// defaults to the row's own level. Sweeps set it to the largest grid level.
    double margin_level = 0.0;
    double margin = 0.1;
    double alpha = 1.0;
    NormMode mode = NormMode::TotalNorm;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Seeded random game: payoff Re, Im ~ U(-5, 5); row means U(-1, 1) + i U(-1, 1);
/// proper covariances G G^H with Gaussian factors; right-hand sides chosen so the
/// uniform real strategy satisfies every row with slack `margin`.
GameSpec gen_instance(const InstanceRecipe& recipe);

/// Independent stream for a named subsystem derived from a single user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view subsystem);

}  // namespace cczsg
