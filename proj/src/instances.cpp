#include "cczsg/instances.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace cczsg {

using Eigen::Index;

void WaveformSet::validate(double modulus_tol) const {
    if (waveforms.empty()) throw Error(ErrorCode::LengthMismatch, "waveform set is empty");
    if (!labels.empty() && labels.size() != waveforms.size()) {
        throw Error(ErrorCode::LengthMismatch, "one label per waveform required");
    }
    const Index n = length();
    if (n < 1) throw Error(ErrorCode::LengthMismatch, "waveforms must be non-empty");
    const double target = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < waveforms.size(); ++k) {
        if (waveforms[k].size() != n) {
            throw Error(ErrorCode::LengthMismatch, "waveform " + std::to_string(k) + " has length " +
                                                       std::to_string(waveforms[k].size()) + ", expected " +
                                                       std::to_string(n));
        }
        const double dev = (waveforms[k].cwiseAbs().array() - target).abs().maxCoeff();
        if (!(dev <= modulus_tol)) {
            throw Error(ErrorCode::ModulusViolation, "waveform " + std::to_string(k) + " deviates from modulus 1/sqrt(N) by " +
                                                         std::to_string(dev));
        }
    }
}

WaveformSet WaveformSet::project_to_constant_modulus() const {
    WaveformSet out = *this;
    for (auto& w : out.waveforms) {
        const double target = 1.0 / std::sqrt(static_cast<double>(w.size()));
        for (Index i = 0; i < w.size(); ++i) {
            if (std::abs(w(i)) == 0.0) throw Error(ErrorCode::ModulusViolation, "zero sample has no phase");
            w(i) = std::polar(target, std::arg(w(i)));
        }
    }
    return out;
}

CMat txjam_payoff(const WaveformSet& tx, const WaveformSet& jam, double modulus_tol) {
    tx.validate(modulus_tol);
    jam.validate(modulus_tol);
    if (tx.length() != jam.length()) {
        throw Error(ErrorCode::LengthMismatch, "transmitter and jammer waveforms differ in length");
    }
    CMat a(tx.waveforms.size(), jam.waveforms.size());
    for (std::size_t i = 0; i < tx.waveforms.size(); ++i)
        for (std::size_t j = 0; j < jam.waveforms.size(); ++j)
            a(static_cast<Index>(i), static_cast<Index>(j)) = tx.waveforms[i].dot(jam.waveforms[j]);
    return a;
}

namespace {

CVec make_wave(std::initializer_list<Complex> values) {
    CVec w(static_cast<Index>(values.size()));
    Index i = 0;
    for (const auto& v : values) w(i++) = v;
    return w;
}

}  // namespace

WaveformSet worked_example_transmitters() {
    using C = Complex;
    WaveformSet s;
    s.waveforms.push_back(make_wave({C(0.408, 0), C(0.204, 0.353), C(-0.204, 0.353), C(-0.408, 0),
                                     C(-0.204, -0.353), C(0.204, -0.353)}));
    s.waveforms.push_back(make_wave({C(0.408, 0), C(0, 0.408), C(-0.408, 0), C(0, -0.408), C(0.288, 0.288),
                                     C(-0.288, -0.288)}));
    s.labels = {"T1", "T2"};
    return s;
}

WaveformSet worked_example_jammers() {
    using C = Complex;
    WaveformSet s;
    s.waveforms.push_back(make_wave({C(0.353, 0.204), C(-0.2041, 0.353), C(0, -0.408), C(0.204, 0.353),
                                     C(-0.204, -0.353), C(-0.408, 0)}));
    s.waveforms.push_back(make_wave({C(0.2887, -0.2887), C(0.2041, 0.3536), C(0, 0.4082), C(0, -0.4082),
                                     C(-0.4082, 0), C(0.353, 0.204)}));
    s.labels = {"J1", "J2"};
    return s;
}

CMat worked_example_payoff() {
    CMat a(2, 2);
    a << Complex(0.0833, 0.0223), Complex(0.5122, -0.0122), Complex(0.1012, 0.2557), Complex(0.1500, -0.2069);
    return a;
}

ModelChoice ModelChoice::parse(std::string_view text) {
    ModelChoice m;
    auto number = [&](std::string_view s) {
        const std::string str(s);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(str, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != str.size() || str.empty()) throw Error(ErrorCode::Schema, "bad number in model '" + std::string(text) + "'");
        return v;
    };
    if (text == "known") {
        m.kind = Kind::Known;
    } else if (text == "unknown-cov") {
        m.kind = Kind::UnknownCov;
    } else if (text.rfind("unknown-moments:", 0) == 0) {
        m.kind = Kind::UnknownMoments;
        m.zeta = number(text.substr(16));
        if (!(m.zeta >= 0.0)) throw Error(ErrorCode::Schema, "zeta must be nonnegative");
    } else if (text == "ces:gaussian") {
        m.family = QuantileFamily::gaussian();
    } else if (text == "ces:laplace") {
        m.family = QuantileFamily::laplace();
    } else if (text == "ces:logistic") {
        m.family = QuantileFamily::logistic();
    } else if (text == "ces:cauchy") {
        m.family = QuantileFamily::cauchy();
    } else if (text.rfind("ces:t:", 0) == 0) {
        m.family = QuantileFamily::student_t(number(text.substr(6)));
    } else {
        throw Error(ErrorCode::Schema, "unknown model '" + std::string(text) + "'");
    }
    return m;
}

std::string ModelChoice::to_string() const {
    switch (kind) {
        case Kind::Ces: return "ces:" + family.name();
        case Kind::Known: return "known";
        case Kind::UnknownCov: return "unknown-cov";
        case Kind::UnknownMoments: {
            std::ostringstream os;
            os << "unknown-moments:" << zeta;
            return os.str();
        }
    }
    return "unknown";
}

AmbiguityModel ModelChoice::instantiate(const ComplexMoments& moments) const {
    switch (kind) {
        case Kind::Ces: return CesModel{family};
        case Kind::Known: return KnownMomentsModel{};
        case Kind::UnknownCov: return UnknownSecondMomentModel{composite_from_complex(moments)};
        case Kind::UnknownMoments: return UnknownMomentsModel{zeta, composite_from_complex(moments)};
    }
    return KnownMomentsModel{};
}

void InstanceRecipe::validate() const {
    if (n < 1 || m < 1) throw Error(ErrorCode::Schema, "strategy dimensions must be positive");
    if (l < 0 || q < 0 || lc < 0 || qc < 0 || lc > l || qc > q) {
        throw Error(ErrorCode::Schema, "row counts must satisfy 0 <= l_c <= l and 0 <= q_c <= q");
    }
    if (!(margin > 0.0)) throw Error(ErrorCode::Schema, "margin must be positive");
    StrategySetSpec{n, alpha, mode, false}.validate();
    StrategySetSpec{m, alpha, mode, false}.validate();
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view subsystem) {
    // FNV-1a over the tag, mixed into the seed with a splitmix64 finalizer.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : subsystem) h = (h ^ c) * 1099511628211ull;
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (h | 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {

struct Rng {
    std::mt19937_64 engine;
    std::uniform_real_distribution<double> unif{-1.0, 1.0};
    std::normal_distribution<double> gauss{0.0, 1.0};

    Complex box(double half) { return {half * unif(engine), half * unif(engine)}; }
    Complex normal() { return Complex(gauss(engine), gauss(engine)) / std::sqrt(2.0); }
};

PlayerSpec gen_player(Rng& rng, const InstanceRecipe& r, Player player) {
    const bool one = player == Player::One;
    const Index dim = one ? r.n : r.m;
    const Index rows = one ? r.l : r.q;
    const Index chance = one ? r.lc : r.qc;
    const double level = one ? r.p1 : r.p2;
    const double margin_level = r.margin_level > 0.0 ? r.margin_level : level;
    const double sign = one ? 1.0 : -1.0;  // player 2 rows read >=
    const CVec uniform = CVec::Constant(dim, Complex(1.0 / static_cast<double>(dim), 0.0));
    const RVec x0 = embed_vec(uniform);

    PlayerSpec spec;
    spec.set = {dim, r.alpha, r.mode, false};
    for (Index k = 0; k < rows - chance; ++k) {
        DetRow row;
        row.coef = CVec(dim);
        for (Index i = 0; i < dim; ++i) row.coef(i) = rng.box(1.0);
        row.rhs = (row.coef.transpose() * uniform)(0).real() + sign * r.margin;
        spec.det_rows.push_back(std::move(row));
    }
    for (Index k = 0; k < chance; ++k) {
        CVec mu(dim);
        for (Index i = 0; i < dim; ++i) mu(i) = rng.box(1.0);
        CMat g(dim, dim);
        const double scale = 0.5 / std::sqrt(static_cast<double>(dim));
        for (Index i = 0; i < dim; ++i)
            for (Index j = 0; j < dim; ++j) g(i, j) = scale * rng.normal();
        CMat gamma = g * g.adjoint();
        gamma = 0.5 * (gamma + gamma.adjoint()).eval();
        ChanceRow row;
        row.moments = ComplexMoments::proper(mu, gamma);
        row.model = r.model.instantiate(row.moments);
        row.level = margin_level;
        // Unified form lhs(x) <= rhs; player 2 rows are stored with the original orientation.
        ChanceRow unified = row;
        unified.moments.mu *= sign;
        unified.rhs = 0.0;
        const double lhs = deterministic_constraint(unified).lhs(x0);
        row.rhs = sign * (lhs + r.margin);
        row.level = level;
        spec.chance_rows.push_back(std::move(row));
    }
    return spec;
}

}  // namespace

GameSpec gen_instance(const InstanceRecipe& recipe) {
    recipe.validate();
    Rng rng{std::mt19937_64(recipe.seed)};
    GameSpec g;
    g.payoff = CMat(recipe.n, recipe.m);
    for (Index i = 0; i < recipe.n; ++i)
        for (Index j = 0; j < recipe.m; ++j) g.payoff(i, j) = rng.box(5.0);
    g.p1 = gen_player(rng, recipe, Player::One);
    g.p2 = gen_player(rng, recipe, Player::Two);
    return g;
}

}  // namespace cczsg
