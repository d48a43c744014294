#include "cczsg/io.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace cczsg {

using Eigen::Index;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::Schema, path + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object()) schema_error(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) schema_error(path, std::string("missing field '") + key + "'");
    return *it;
}

double number(const Json& j, const std::string& path) {
    if (!j.is_number()) schema_error(path, "expected a number");
    return j.get<double>();
}

double number_field(const Json& j, const char* key, const std::string& path) {
    return number(field(j, key, path), path + "." + key);
}

Index index_field(const Json& j, const char* key, const std::string& path) {
    const Json& v = field(j, key, path);
    if (!v.is_number_integer()) schema_error(path + "." + key, "expected an integer");
    return v.get<Index>();
}

std::string string_field(const Json& j, const char* key, const std::string& path) {
    const Json& v = field(j, key, path);
    if (!v.is_string()) schema_error(path + "." + key, "expected a string");
    return v.get<std::string>();
}

bool bool_field(const Json& j, const char* key, const std::string& path, bool fallback) {
    if (!j.contains(key)) return fallback;
    const Json& v = j.at(key);
    if (!v.is_boolean()) schema_error(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

const Json& array(const Json& j, const std::string& path) {
    if (!j.is_array()) schema_error(path, "expected an array");
    return j;
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

template <class Mat, class Elem>
Mat matrix_from_json(const Json& j, const std::string& path, Elem (*elem)(const Json&, const std::string&)) {
    const Json& rows = array(j, path);
    const Index r = static_cast<Index>(rows.size());
    Index c = 0;
    if (r > 0) c = static_cast<Index>(array(rows[0], at(path, 0)).size());
    Mat out(r, c);
    for (Index i = 0; i < r; ++i) {
        const std::string rp = at(path, static_cast<std::size_t>(i));
        const Json& row = array(rows[static_cast<std::size_t>(i)], rp);
        if (static_cast<Index>(row.size()) != c) schema_error(rp, "ragged matrix row");
        for (Index k = 0; k < c; ++k) out(i, k) = elem(row[static_cast<std::size_t>(k)], at(rp, static_cast<std::size_t>(k)));
    }
    return out;
}

Complex complex_elem(const Json& j, const std::string& path) { return complex_from_json(j, path); }
double real_elem(const Json& j, const std::string& path) { return number(j, path); }

Json multipliers_to_json(const SideMultipliers& m) {
    Json j;
    j["lambda_det"] = to_json(m.lambda_det);
    j["delta"] = to_json(m.delta);
    Json lambda = Json::array();
    for (const auto& v : m.lambda) lambda.push_back(to_json(v));
    j["lambda"] = lambda;
    Json eta = Json::array();
    for (const auto& v : m.eta) eta.push_back(to_json(v));
    j["eta"] = eta;
    j["beta"] = to_json(m.beta);
    j["rho"] = to_json(m.rho);
    j["r"] = to_json(m.r);
    return j;
}

SideMultipliers multipliers_from_json(const Json& j, const std::string& path) {
    SideMultipliers m;
    m.lambda_det = rvec_from_json(field(j, "lambda_det", path), path + ".lambda_det");
    m.delta = rvec_from_json(field(j, "delta", path), path + ".delta");
    const Json& lambda = array(field(j, "lambda", path), path + ".lambda");
    for (std::size_t i = 0; i < lambda.size(); ++i) m.lambda.push_back(cvec_from_json(lambda[i], at(path + ".lambda", i)));
    const Json& eta = array(field(j, "eta", path), path + ".eta");
    for (std::size_t i = 0; i < eta.size(); ++i) m.eta.push_back(cvec_from_json(eta[i], at(path + ".eta", i)));
    m.beta = cvec_from_json(field(j, "beta", path), path + ".beta");
    m.rho = complex_from_json(field(j, "rho", path), path + ".rho");
    m.r = rvec_from_json(field(j, "r", path), path + ".r");
    return m;
}

Json residuals_to_json(const ResidualReport& r) {
    Json j;
    j["primal"] = r.primal;
    j["dual"] = r.dual;
    j["gap"] = r.gap;
    j["primal_abs"] = r.primal_abs;
    j["dual_abs"] = r.dual_abs;
    j["gap_abs"] = r.gap_abs;
    j["primal_objective"] = r.primal_objective;
    j["dual_objective"] = r.dual_objective;
    return j;
}

ResidualReport residuals_from_json(const Json& j, const std::string& path) {
    ResidualReport r;
    r.primal = number_field(j, "primal", path);
    r.dual = number_field(j, "dual", path);
    r.gap = number_field(j, "gap", path);
    r.primal_abs = number_field(j, "primal_abs", path);
    r.dual_abs = number_field(j, "dual_abs", path);
    r.gap_abs = number_field(j, "gap_abs", path);
    r.primal_objective = number_field(j, "primal_objective", path);
    r.dual_objective = number_field(j, "dual_objective", path);
    return r;
}

Json certification_to_json(const CertificationReport& c) {
    Json j;
    j["performed"] = c.performed;
    j["samples"] = c.samples;
    j["tol"] = c.tol;
    j["max_violation_u"] = c.max_violation_u;
    j["max_violation_v"] = c.max_violation_v;
    j["violations"] = c.violations;
    j["passed"] = c.passed;
    return j;
}

CertificationReport certification_from_json(const Json& j, const std::string& path) {
    CertificationReport c;
    c.performed = bool_field(j, "performed", path, false);
    c.samples = static_cast<int>(index_field(j, "samples", path));
    c.tol = number_field(j, "tol", path);
    c.max_violation_u = number_field(j, "max_violation_u", path);
    c.max_violation_v = number_field(j, "max_violation_v", path);
    c.violations = static_cast<int>(index_field(j, "violations", path));
    c.passed = bool_field(j, "passed", path, false);
    return c;
}

Json player_to_json(const PlayerSpec& p) {
    Json j;
    j["dim"] = p.set.dim;
    j["alpha"] = p.set.alpha;
    j["mode"] = p.set.mode == NormMode::TotalNorm ? "total" : "imag";
    j["real_only"] = p.set.real_only;
    Json rows = Json::array();
    for (const auto& r : p.det_rows) {
        Json row;
        row["type"] = "det";
        row["coef"] = to_json(r.coef);
        row["rhs"] = r.rhs;
        rows.push_back(row);
    }
    for (const auto& r : p.chance_rows) {
        Json row;
        row["type"] = "chance";
        row["moments"] = to_json(r.moments);
        row["model"] = to_json(r.model);
        row["rhs"] = r.rhs;
        row["level"] = r.level;
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
}

PlayerSpec player_from_json(const Json& j, const std::string& path) {
    PlayerSpec p;
    p.set.dim = index_field(j, "dim", path);
    p.set.alpha = j.contains("alpha") ? number_field(j, "alpha", path) : 1.0;
    const std::string mode = j.contains("mode") ? string_field(j, "mode", path) : "imag";
    if (mode == "total") p.set.mode = NormMode::TotalNorm;
    else if (mode == "imag") p.set.mode = NormMode::ImagNorm;
    else schema_error(path + ".mode", "expected \"total\" or \"imag\"");
    p.set.real_only = bool_field(j, "real_only", path, false);
    if (j.contains("rows")) {
        const Json& rows = array(j.at("rows"), path + ".rows");
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::string rp = at(path + ".rows", i);
            const std::string type = string_field(rows[i], "type", rp);
            if (type == "det") {
                DetRow row;
                row.coef = cvec_from_json(field(rows[i], "coef", rp), rp + ".coef");
                row.rhs = number_field(rows[i], "rhs", rp);
                p.det_rows.push_back(std::move(row));
            } else if (type == "chance") {
                ChanceRow row;
                row.moments = moments_from_json(field(rows[i], "moments", rp), rp + ".moments");
                row.model = rows[i].contains("model") ? model_from_json(rows[i].at("model"), rp + ".model")
                                                      : AmbiguityModel{CesModel{QuantileFamily::gaussian()}};
                row.rhs = number_field(rows[i], "rhs", rp);
                row.level = number_field(rows[i], "level", rp);
                p.chance_rows.push_back(std::move(row));
            } else {
                schema_error(rp + ".type", "expected \"det\" or \"chance\"");
            }
        }
    }
    return p;
}

Json waveform_list(const WaveformSet& s) {
    Json list = Json::array();
    for (std::size_t i = 0; i < s.waveforms.size(); ++i) {
        Json w;
        w["label"] = i < s.labels.size() ? s.labels[i] : std::to_string(i);
        w["samples"] = to_json(s.waveforms[i]);
        list.push_back(w);
    }
    return list;
}

WaveformSet waveform_list_from_json(const Json& j, const std::string& path) {
    WaveformSet s;
    const Json& list = array(j, path);
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string wp = at(path, i);
        s.labels.push_back(list[i].contains("label") ? string_field(list[i], "label", wp) : std::to_string(i));
        s.waveforms.push_back(cvec_from_json(field(list[i], "samples", wp), wp + ".samples"));
    }
    return s;
}

}  // namespace

Json to_json(Complex c) { return Json{{"re", c.real()}, {"im", c.imag()}}; }

Json to_json(const CVec& v) {
    Json j = Json::array();
    for (Index i = 0; i < v.size(); ++i) j.push_back(to_json(v(i)));
    return j;
}

Json to_json(const CMat& a) {
    Json j = Json::array();
    for (Index i = 0; i < a.rows(); ++i) {
        Json row = Json::array();
        for (Index k = 0; k < a.cols(); ++k) row.push_back(to_json(a(i, k)));
        j.push_back(row);
    }
    return j;
}

Json to_json(const RVec& v) {
    Json j = Json::array();
    for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

Json to_json(const RMat& a) {
    Json j = Json::array();
    for (Index i = 0; i < a.rows(); ++i) {
        Json row = Json::array();
        for (Index k = 0; k < a.cols(); ++k) row.push_back(a(i, k));
        j.push_back(row);
    }
    return j;
}

Complex complex_from_json(const Json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    return {number_field(j, "re", path), number_field(j, "im", path)};
}

CVec cvec_from_json(const Json& j, const std::string& path) {
    const Json& a = array(j, path);
    CVec v(static_cast<Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Index>(i)) = complex_from_json(a[i], at(path, i));
    return v;
}

CMat cmat_from_json(const Json& j, const std::string& path) { return matrix_from_json<CMat>(j, path, complex_elem); }

RVec rvec_from_json(const Json& j, const std::string& path) {
    const Json& a = array(j, path);
    RVec v(static_cast<Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Index>(i)) = number(a[i], at(path, i));
    return v;
}

RMat rmat_from_json(const Json& j, const std::string& path) { return matrix_from_json<RMat>(j, path, real_elem); }

Json to_json(const ComplexMoments& m) {
    Json j;
    j["mu"] = to_json(m.mu);
    j["gamma"] = to_json(m.gamma);
    j["j"] = to_json(m.jmat);
    return j;
}

ComplexMoments moments_from_json(const Json& j, const std::string& path) {
    ComplexMoments m;
    m.mu = cvec_from_json(field(j, "mu", path), path + ".mu");
    m.gamma = cmat_from_json(field(j, "gamma", path), path + ".gamma");
    m.jmat = j.contains("j") ? cmat_from_json(j.at("j"), path + ".j") : CMat::Zero(m.dim(), m.dim());
    try {
        m.validate();
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
    return m;
}

Json to_json(const AmbiguityModel& model) {
    Json j;
    if (const auto* ces = std::get_if<CesModel>(&model)) {
        j["kind"] = "ces";
        if (ces->family.kind == QuantileFamily::Kind::StudentT) {
            j["family"] = "t";
            j["nu"] = ces->family.nu;
        } else {
            j["family"] = ces->family.name();
        }
    } else if (std::holds_alternative<KnownMomentsModel>(model)) {
        j["kind"] = "known";
    } else if (const auto* u = std::get_if<UnknownSecondMomentModel>(&model)) {
        j["kind"] = "unknown_cov";
        j["bound"] = to_json(u->bound);
    } else if (const auto* u = std::get_if<UnknownMomentsModel>(&model)) {
        j["kind"] = "unknown_moments";
        j["zeta"] = u->zeta;
        j["bound"] = to_json(u->bound);
    }
    return j;
}

AmbiguityModel model_from_json(const Json& j, const std::string& path) {
    const std::string kind = string_field(j, "kind", path);
    if (kind == "ces") {
        const std::string family = j.contains("family") ? string_field(j, "family", path) : "gaussian";
        if (family == "gaussian") return CesModel{QuantileFamily::gaussian()};
        if (family == "laplace") return CesModel{QuantileFamily::laplace()};
        if (family == "logistic") return CesModel{QuantileFamily::logistic()};
        if (family == "cauchy") return CesModel{QuantileFamily::cauchy()};
        if (family == "t") return CesModel{QuantileFamily::student_t(number_field(j, "nu", path))};
        schema_error(path + ".family", "unknown family '" + family + "'");
    }
    if (kind == "known") return KnownMomentsModel{};
    if (kind == "unknown_cov") return UnknownSecondMomentModel{rmat_from_json(field(j, "bound", path), path + ".bound")};
    if (kind == "unknown_moments") {
        return UnknownMomentsModel{number_field(j, "zeta", path), rmat_from_json(field(j, "bound", path), path + ".bound")};
    }
    schema_error(path + ".kind", "unknown model kind '" + kind + "'");
}

Json to_json(const GameSpec& game) {
    Json j;
    j["payoff"] = to_json(game.payoff);
    j["player1"] = player_to_json(game.p1);
    j["player2"] = player_to_json(game.p2);
    return j;
}

GameSpec game_from_json(const Json& j) {
    GameSpec g;
    g.payoff = cmat_from_json(field(j, "payoff", "$"), "$.payoff");
    g.p1 = player_from_json(field(j, "player1", "$"), "$.player1");
    g.p2 = player_from_json(field(j, "player2", "$"), "$.player2");
    g.validate();
    return g;
}

Json to_json(const Equilibrium& eq) {
    Json j;
    j["status"] = "optimal";
    j["value"] = eq.value;
    j["value_complex"] = to_json(eq.value_complex);
    j["primal_value"] = eq.primal_value;
    j["dual_value"] = eq.dual_value;
    j["duality_gap"] = eq.duality_gap;
    j["u_star"] = to_json(eq.u_star);
    j["v_star"] = to_json(eq.v_star);
    j["multipliers"] = Json{{"player1", multipliers_to_json(eq.p1)}, {"player2", multipliers_to_json(eq.p2)}};
    j["residuals"] = Json{{"primal", residuals_to_json(eq.primal_residuals)}, {"dual", residuals_to_json(eq.dual_residuals)}};
    j["iterations"] = Json{{"primal", eq.primal_iterations}, {"dual", eq.dual_iterations}};
    j["certification"] = certification_to_json(eq.certification);
    return j;
}

Equilibrium equilibrium_from_json(const Json& j) {
    Equilibrium eq;
    if (string_field(j, "status", "$") != "optimal") schema_error("$.status", "expected \"optimal\"");
    eq.value = number_field(j, "value", "$");
    eq.value_complex = complex_from_json(field(j, "value_complex", "$"), "$.value_complex");
    eq.primal_value = number_field(j, "primal_value", "$");
    eq.dual_value = number_field(j, "dual_value", "$");
    eq.duality_gap = number_field(j, "duality_gap", "$");
    eq.u_star = cvec_from_json(field(j, "u_star", "$"), "$.u_star");
    eq.v_star = cvec_from_json(field(j, "v_star", "$"), "$.v_star");
    const Json& mult = field(j, "multipliers", "$");
    eq.p1 = multipliers_from_json(field(mult, "player1", "$.multipliers"), "$.multipliers.player1");
    eq.p2 = multipliers_from_json(field(mult, "player2", "$.multipliers"), "$.multipliers.player2");
    const Json& res = field(j, "residuals", "$");
    eq.primal_residuals = residuals_from_json(field(res, "primal", "$.residuals"), "$.residuals.primal");
    eq.dual_residuals = residuals_from_json(field(res, "dual", "$.residuals"), "$.residuals.dual");
    const Json& it = field(j, "iterations", "$");
    eq.primal_iterations = static_cast<int>(index_field(it, "primal", "$.iterations"));
    eq.dual_iterations = static_cast<int>(index_field(it, "dual", "$.iterations"));
    eq.certification = certification_from_json(field(j, "certification", "$"), "$.certification");
    if (eq.u_star.size() == 0 || eq.v_star.size() == 0) schema_error("$", "empty strategy");
    return eq;
}

Json to_json(const WaveformSet& tx, const WaveformSet& jam) {
    Json j;
    j["transmitters"] = waveform_list(tx);
    j["jammers"] = waveform_list(jam);
    return j;
}

std::pair<WaveformSet, WaveformSet> waveforms_from_json(const Json& j) {
    return {waveform_list_from_json(field(j, "transmitters", "$"), "$.transmitters"),
            waveform_list_from_json(field(j, "jammers", "$"), "$.jammers")};
}

Json to_json(const CalibrationReport& report) {
    Json j;
    j["scenarios"] = report.scenarios;
    j["trials"] = report.trials;
    j["any_violation_p1"] = report.any_violation_p1;
    j["any_violation_p2"] = report.any_violation_p2;
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        Json row;
        row["constraint_id"] = r.id;
        row["target"] = r.target;
        row["mean_ratio"] = r.mean_ratio;
        row["std_ratio"] = r.std_ratio;
        row["max_ratio"] = r.max_ratio;
        row["slack"] = r.slack;
        row["family"] = r.family;
        row["exact"] = r.exact;
        if (!r.exact) row["note"] = "conservative bound, not exact";
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
}

Json error_json(const Error& e) {
    return Json{{"error", Json{{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}};
}

Json read_json(const std::string& path) {
    std::string text;
    if (path == "-") {
        std::ostringstream os;
        os << std::cin.rdbuf();
        text = os.str();
    } else {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
        std::ostringstream os;
        os << in.rdbuf();
        text = os.str();
    }
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::Schema, (path == "-" ? std::string("<stdin>") : path) + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << '\n';
        std::cout.flush();
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
    if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace cczsg
