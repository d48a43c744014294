#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "cczsg/instances.hpp"
#include "cczsg/montecarlo.hpp"

namespace cczsg {

using Json = nlohmann::ordered_json;

// Complex numbers are {"re", "im"} objects, vectors are arrays, matrices are
// row-major arrays of arrays. Every reader throws Error(Schema) naming the
// offending path.

Json to_json(Complex c);
Json to_json(const CVec& v);
Json to_json(const CMat& a);
Json to_json(const RVec& v);
Json to_json(const RMat& a);

Complex complex_from_json(const Json& j, const std::string& path = "$");
CVec cvec_from_json(const Json& j, const std::string& path = "$");
CMat cmat_from_json(const Json& j, const std::string& path = "$");
RVec rvec_from_json(const Json& j, const std::string& path = "$");
RMat rmat_from_json(const Json& j, const std::string& path = "$");

/// {"mu": [...], "gamma": [[...]], "j": [[...]]}
Json to_json(const ComplexMoments& m);
ComplexMoments moments_from_json(const Json& j, const std::string& path = "$");

/// Tagged union on "kind": ces (family, nu), known, unknown_cov (bound),
/// unknown_moments (zeta, bound).
Json to_json(const AmbiguityModel& model);
AmbiguityModel model_from_json(const Json& j, const std::string& path = "$");

/// {"payoff", "player1": {...}, "player2": {...}}; each player carries
/// dim, alpha, mode ("total" | "imag"), real_only and a list of rows tagged
/// "det" {coef, rhs} or "chance" {moments, model, rhs, level}.
Json to_json(const GameSpec& game);
/// Parses and validates (dimensions, moments, models, strategy sets).
GameSpec game_from_json(const Json& j);

Json to_json(const Equilibrium& eq);
/// Checks the report schema and returns the strategies and value it carries.
Equilibrium equilibrium_from_json(const Json& j);

/// {"transmitters": [{"label", "samples"}], "jammers": [...]}
Json to_json(const WaveformSet& tx, const WaveformSet& jam);
std::pair<WaveformSet, WaveformSet> waveforms_from_json(const Json& j);

Json to_json(const CalibrationReport& report);

/// {"error": {"code", "message"}}
Json error_json(const Error& e);

/// Reads a JSON document from a path, "-" meaning standard input.
Json read_json(const std::string& path);
/// Writes with a trailing newline; "-" means standard output.
void write_text(const std::string& path, const std::string& text);

}  // namespace cczsg
