#include "cczsg/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include <Eigen/SparseCholesky>

namespace cczsg {

using Eigen::Index;
using SpMat = Eigen::SparseMatrix<double>;

std::string_view to_string(ConeKind kind) {
    switch (kind) {
        case ConeKind::Zero: return "zero";
        case ConeKind::NonNeg: return "nonneg";
        case ConeKind::SOC: return "soc";
    }
    return "unknown";
}

std::string_view to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Program container

AffineRows::AffineRows(Index rows) : constant_(RVec::Zero(rows)) {}

AffineRows& AffineRows::add(Index row, Index var, double coef) {
    if (row < 0 || row >= rows()) throw Error(ErrorCode::MalformedProgram, "affine row out of range");
    if (coef != 0.0) entries_.emplace_back(row, var, coef);
    return *this;
}

AffineRows& AffineRows::add_block(Index row0, Index var0, const RMat& m) {
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) add(row0 + i, var0 + j, m(i, j));
    return *this;
}

AffineRows& AffineRows::add_identity(Index row0, Index var0, Index n, double scale) {
    for (Index i = 0; i < n; ++i) add(row0 + i, var0 + i, scale);
    return *this;
}

AffineRows& AffineRows::add_constant(Index row, double value) {
    if (row < 0 || row >= rows()) throw Error(ErrorCode::MalformedProgram, "affine row out of range");
    constant_(row) += value;
    return *this;
}

RVec AffineRows::evaluate(const RVec& x) const {
    RVec out = constant_;
    for (const auto& t : entries_) out(t.row()) += t.value() * x(t.col());
    return out;
}

VarBlock ConicProgram::add_variables(const std::string& name, Index size) {
    if (has_var(name)) throw Error(ErrorCode::MalformedProgram, "duplicate variable block " + name);
    if (size < 0) throw Error(ErrorCode::MalformedProgram, "negative block size for " + name);
    VarBlock block{name, num_vars_, size};
    vars_.push_back(block);
    num_vars_ += size;
    objective_.resize(static_cast<std::size_t>(num_vars_), 0.0);
    return block;
}

const VarBlock& ConicProgram::var(const std::string& name) const {
    for (const auto& v : vars_)
        if (v.name == name) return v;
    throw Error(ErrorCode::MalformedProgram, "unknown variable block " + name);
}

bool ConicProgram::has_var(const std::string& name) const {
    return std::any_of(vars_.begin(), vars_.end(), [&](const VarBlock& v) { return v.name == name; });
}

void ConicProgram::add_objective(Index var, double coef) {
    if (var < 0 || var >= num_vars_) throw Error(ErrorCode::MalformedProgram, "objective index out of range");
    objective_[static_cast<std::size_t>(var)] += coef;
}

RVec ConicProgram::objective() const {
    return Eigen::Map<const RVec>(objective_.data(), num_vars_);
}

std::size_t ConicProgram::add_constraint(const std::string& name, ConeKind kind, AffineRows rows) {
    blocks_.push_back({name, kind, std::move(rows)});
    return blocks_.size() - 1;
}

void ConicProgram::validate() const {
    for (const auto& b : blocks_) {
        for (const auto& t : b.rows.entries()) {
            if (t.col() < 0 || t.col() >= num_vars_) {
                throw Error(ErrorCode::MalformedProgram, "constraint " + b.name + " references variable out of range");
            }
        }
        if (b.kind == ConeKind::SOC && b.rows.rows() < 1) {
            throw Error(ErrorCode::MalformedProgram, "second-order cone " + b.name + " is empty");
        }
        if (!b.rows.constant().allFinite()) {
            throw Error(ErrorCode::MalformedProgram, "constraint " + b.name + " has non-finite data");
        }
        for (const auto& t : b.rows.entries()) {
            if (!std::isfinite(t.value())) {
                throw Error(ErrorCode::MalformedProgram, "constraint " + b.name + " has non-finite data");
            }
        }
    }
    for (double c : objective_) {
        if (!std::isfinite(c)) throw Error(ErrorCode::MalformedProgram, "non-finite objective");
    }
}

nlohmann::ordered_json ConicProgram::dump() const {
    nlohmann::ordered_json j;
    j["sense"] = sense_ == Sense::Minimize ? "min" : "max";
    j["num_vars"] = num_vars_;
    j["c"] = objective_;
    j["c0"] = objective_constant_;
    auto vars = nlohmann::ordered_json::array();
    for (const auto& v : vars_) vars.push_back({{"name", v.name}, {"offset", v.offset}, {"size", v.size}});
    j["variables"] = vars;
    auto blocks = nlohmann::ordered_json::array();
    for (const auto& b : blocks_) {
        nlohmann::ordered_json jb;
        jb["name"] = b.name;
        jb["kind"] = to_string(b.kind);
        jb["rows"] = b.rows.rows();
        auto entries = nlohmann::ordered_json::array();
        for (const auto& t : b.rows.entries()) entries.push_back({t.row(), t.col(), t.value()});
        jb["entries"] = entries;
        jb["constant"] = std::vector<double>(b.rows.constant().data(),
                                             b.rows.constant().data() + b.rows.rows());
        blocks.push_back(jb);
    }
    j["blocks"] = blocks;
    return j;
}

RVec ConicSolution::value(const ConicProgram& p, const std::string& name) const {
    const VarBlock& b = p.var(name);
    return x.segment(b.offset, b.size);
}

double default_solver_tolerance() {
    if (const char* env = std::getenv("CCZSG_SOLVER_TOL")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end != env && std::isfinite(v) && v > 0.0) return v;
    }
    return 1e-8;
}

// ---------------------------------------------------------------------------
// Residual check

namespace {

double cone_violation(ConeKind kind, const RVec& v) {
    switch (kind) {
        case ConeKind::Zero: return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
        case ConeKind::NonNeg: return v.size() ? std::max(0.0, -v.minCoeff()) : 0.0;
        case ConeKind::SOC: return std::max(0.0, v.tail(v.size() - 1).norm() - v(0));
    }
    return 0.0;
}

double dual_cone_violation(ConeKind kind, const RVec& v) {
    return kind == ConeKind::Zero ? 0.0 : cone_violation(kind, v);
}

}  // namespace

ResidualReport kkt_residuals(const ConicProgram& program, const ConicSolution& solution) {
    require_same_dims(solution.x.size(), program.num_vars(), "kkt_residuals x");
    const auto& blocks = program.constraints();
    const bool have_duals = solution.duals.size() == blocks.size();
    const double sign = program.sense() == Sense::Minimize ? 1.0 : -1.0;
    const RVec c = sign * program.objective();
    const double c0 = sign * program.objective_constant();

    ResidualReport r;
    RVec stationarity = c;
    double dual_cone = 0.0;
    double dual_obj = c0;
    double e_scale = 0.0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto& b = blocks[k];
        const RVec val = b.rows.evaluate(solution.x);
        r.primal_abs = std::max(r.primal_abs, cone_violation(b.kind, val));
        if (b.rows.rows() > 0) e_scale = std::max(e_scale, b.rows.constant().cwiseAbs().maxCoeff());
        if (!have_duals) continue;
        const RVec& pi = solution.duals[k];
        require_same_dims(pi.size(), b.rows.rows(), "kkt_residuals dual block");
        for (const auto& t : b.rows.entries()) stationarity(t.col()) -= t.value() * pi(t.row());
        dual_cone = std::max(dual_cone, dual_cone_violation(b.kind, pi));
        dual_obj -= pi.dot(b.rows.constant());
    }
    const double primal_obj = c.dot(solution.x) + c0;
    if (have_duals) {
        r.dual_abs = (stationarity.size() ? stationarity.cwiseAbs().maxCoeff() : 0.0) + dual_cone;
        r.gap_abs = std::fabs(primal_obj - dual_obj);
    } else {
        r.dual_abs = std::numeric_limits<double>::infinity();
        r.gap_abs = std::numeric_limits<double>::infinity();
    }
    const double c_scale = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
    r.primal = r.primal_abs / (1.0 + e_scale);
    r.dual = r.dual_abs / (1.0 + c_scale);
    r.gap = r.gap_abs / (1.0 + std::fabs(primal_obj));
    r.primal_objective = sign * primal_obj;
    r.dual_objective = sign * dual_obj;
    return r;
}

// ---------------------------------------------------------------------------
// Homogeneous self-dual interior-point method
//
//   min c^T x  s.t.  A x = b,  G x + s = h,  s in K
//   max -b^T y - h^T z  s.t.  A^T y + G^T z + c = 0,  z in K
//
// K is a product of a nonnegative orthant and second-order cones. Search
// directions use Nesterov-Todd scaling and a Mehrotra predictor-corrector;
// linear systems are solved with a regularized sparse LDL^T factorization of
// the quasi-definite KKT matrix followed by iterative refinement.

namespace {

struct Layout {
    Index n = 0;   // variables
    Index p = 0;   // equality rows
    Index l = 0;   // nonnegative rows
    Index m = 0;   // total cone rows
    std::vector<Index> soc_offset;
    std::vector<Index> soc_dim;
    std::vector<Index> block_row;  // start row of each block (in A for Zero, in G otherwise)
};

struct StandardForm {
    Layout layout;
    SpMat a;
    SpMat g;
    RVec b;
    RVec h;
    RVec c;
    double c0 = 0.0;
};

StandardForm to_standard_form(const ConicProgram& program) {
    StandardForm f;
    Layout& lay = f.layout;
    const auto& blocks = program.constraints();
    lay.n = program.num_vars();
    lay.block_row.assign(blocks.size(), 0);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        if (blocks[k].kind == ConeKind::Zero) {
            lay.block_row[k] = lay.p;
            lay.p += blocks[k].rows.rows();
        } else if (blocks[k].kind == ConeKind::NonNeg) {
            lay.block_row[k] = lay.l;
            lay.l += blocks[k].rows.rows();
        }
    }
    lay.m = lay.l;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        if (blocks[k].kind != ConeKind::SOC) continue;
        lay.block_row[k] = lay.m;
        lay.soc_offset.push_back(lay.m);
        lay.soc_dim.push_back(blocks[k].rows.rows());
        lay.m += blocks[k].rows.rows();
    }
    std::vector<Eigen::Triplet<double>> ta;
    std::vector<Eigen::Triplet<double>> tg;
    f.b = RVec::Zero(lay.p);
    f.h = RVec::Zero(lay.m);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto& rows = blocks[k].rows;
        const Index r0 = lay.block_row[k];
        if (blocks[k].kind == ConeKind::Zero) {
            for (const auto& t : rows.entries()) ta.emplace_back(r0 + t.row(), t.col(), t.value());
            f.b.segment(r0, rows.rows()) = -rows.constant();
        } else {
            for (const auto& t : rows.entries()) tg.emplace_back(r0 + t.row(), t.col(), -t.value());
            f.h.segment(r0, rows.rows()) = rows.constant();
        }
    }
    f.a.resize(lay.p, lay.n);
    f.a.setFromTriplets(ta.begin(), ta.end());
    f.g.resize(lay.m, lay.n);
    f.g.setFromTriplets(tg.begin(), tg.end());
    const double sign = program.sense() == Sense::Minimize ? 1.0 : -1.0;
    f.c = sign * program.objective();
    f.c0 = sign * program.objective_constant();
    return f;
}

// Cone algebra on vectors laid out as [nonneg (l) | soc_1 | soc_2 | ...].
class ConeOps {
public:
    explicit ConeOps(const Layout& lay) : lay_(lay) {}

    Index degree() const { return lay_.l + static_cast<Index>(lay_.soc_dim.size()); }

    RVec identity() const {
        RVec e = RVec::Zero(lay_.m);
        e.head(lay_.l).setOnes();
        for (Index off : lay_.soc_offset) e(off) = 1.0;
        return e;
    }

    // Smallest t with u + t e in the closed cone.
    double min_shift(const RVec& u) const {
        double t = -std::numeric_limits<double>::infinity();
        if (lay_.l > 0) t = std::max(t, -u.head(lay_.l).minCoeff());
        for (std::size_t k = 0; k < lay_.soc_dim.size(); ++k) {
            const Index off = lay_.soc_offset[k];
            const Index q = lay_.soc_dim[k];
            t = std::max(t, u.segment(off + 1, q - 1).norm() - u(off));
        }
        return t;
    }

    RVec circ(const RVec& u, const RVec& v) const {
        RVec w(lay_.m);
        w.head(lay_.l) = u.head(lay_.l).cwiseProduct(v.head(lay_.l));
        for (std::size_t k = 0; k < lay_.soc_dim.size(); ++k) {
            const Index off = lay_.soc_offset[k];
            const Index q = lay_.soc_dim[k];
            const auto u0 = u(off);
            const auto v0 = v(off);
            w(off) = u.segment(off, q).dot(v.segment(off, q));
            w.segment(off + 1, q - 1) = u0 * v.segment(off + 1, q - 1) + v0 * u.segment(off + 1, q - 1);
        }
        return w;
    }

    // w with lambda o w = d.
    RVec circ_solve(const RVec& lambda, const RVec& d) const {
        RVec w(lay_.m);
        w.head(lay_.l) = d.head(lay_.l).cwiseQuotient(lambda.head(lay_.l));
        for (std::size_t k = 0; k < lay_.soc_dim.size(); ++k) {
            const Index off = lay_.soc_offset[k];
            const Index q = lay_.soc_dim[k];
            const double l0 = lambda(off);
            const auto l1 = lambda.segment(off + 1, q - 1);
            const double det = l0 * l0 - l1.squaredNorm();
            const double w0 = (l0 * d(off) - l1.dot(d.segment(off + 1, q - 1))) / det;
            w(off) = w0;
            w.segment(off + 1, q - 1) = (d.segment(off + 1, q - 1) - w0 * l1) / l0;
        }
        return w;
    }

    // Largest step t (capped) with u + t d in the cone, u interior.
    double max_step(const RVec& u, const RVec& d, double cap) const {
        double t = cap;
        for (Index i = 0; i < lay_.l; ++i)
            if (d(i) < 0.0) t = std::min(t, -u(i) / d(i));
        for (std::size_t k = 0; k < lay_.soc_dim.size(); ++k) {
            const Index off = lay_.soc_offset[k];
            const Index q = lay_.soc_dim[k];
            const double u0 = u(off);
            const double d0 = d(off);
            const auto u1 = u.segment(off + 1, q - 1);
            const auto d1 = d.segment(off + 1, q - 1);
            if (d0 < 0.0) t = std::min(t, -u0 / d0);
            const double qa = d0 * d0 - d1.squaredNorm();
            const double qb = 2.0 * (u0 * d0 - u1.dot(d1));
            const double qc = std::max(0.0, u0 * u0 - u1.squaredNorm());
            t = std::min(t, first_positive_root(qa, qb, qc));
        }
        return t;
    }

private:
    static double first_positive_root(double a, double b, double c) {
        const double inf = std::numeric_limits<double>::infinity();
        const double scale = std::max({std::fabs(a), std::fabs(b), std::fabs(c), 1e-300});
        if (std::fabs(a) <= 1e-15 * scale) return b < 0.0 ? -c / b : inf;
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) return inf;
        const double sq = std::sqrt(disc);
        const double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
        double best = inf;
        for (double r : {qq / a, qq != 0.0 ? c / qq : inf})
            if (r > 0.0) best = std::min(best, r);
        return best;
    }

    const Layout& lay_;
};

// Nesterov-Todd scaling W with W z = W^{-1} s = lambda.
struct Scaling {
    RVec nn;                    // sqrt(s / z) on the orthant
    std::vector<double> eta;    // per second-order cone
    std::vector<RVec> wbar;     // normalized scaling point, wbar^T J wbar = 1
    RVec lambda;
};

bool compute_scaling(const Layout& lay, const RVec& s, const RVec& z, Scaling& w) {
    w.nn = (s.head(lay.l).cwiseQuotient(z.head(lay.l))).cwiseSqrt();
    w.eta.assign(lay.soc_dim.size(), 1.0);
    w.wbar.resize(lay.soc_dim.size());
    for (std::size_t k = 0; k < lay.soc_dim.size(); ++k) {
        const Index off = lay.soc_offset[k];
        const Index q = lay.soc_dim[k];
        const auto sk = s.segment(off, q);
        const auto zk = z.segment(off, q);
        const double sres = sk(0) * sk(0) - sk.tail(q - 1).squaredNorm();
        const double zres = zk(0) * zk(0) - zk.tail(q - 1).squaredNorm();
        if (!(sres > 0.0) || !(zres > 0.0)) return false;
        const double sn = std::sqrt(sres);
        const double zn = std::sqrt(zres);
        const RVec sbar = sk / sn;
        const RVec zbar = zk / zn;
        const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
        RVec wb(q);
        wb(0) = (sbar(0) + zbar(0)) / (2.0 * gamma);
        wb.tail(q - 1) = (sbar.tail(q - 1) - zbar.tail(q - 1)) / (2.0 * gamma);
        // Re-normalize against round-off so that wbar^T J wbar = 1 exactly.
        wb(0) = std::sqrt(1.0 + wb.tail(q - 1).squaredNorm());
        w.eta[k] = std::sqrt(sn / zn);
        w.wbar[k] = std::move(wb);
    }
    return w.nn.allFinite();
}

RVec apply_w(const Layout& lay, const Scaling& w, const RVec& v, bool inverse) {
    RVec out(lay.m);
    if (inverse) out.head(lay.l) = v.head(lay.l).cwiseQuotient(w.nn);
    else out.head(lay.l) = v.head(lay.l).cwiseProduct(w.nn);
    for (std::size_t k = 0; k < lay.soc_dim.size(); ++k) {
        const Index off = lay.soc_offset[k];
        const Index q = lay.soc_dim[k];
        const RVec& wb = w.wbar[k];
        const double w0 = wb(0);
        const auto w1 = wb.tail(q - 1);
        const double v0 = v(off);
        const auto v1 = v.segment(off + 1, q - 1);
        const double dot = w1.dot(v1);
        const double sgn = inverse ? -1.0 : 1.0;
        const double f = inverse ? 1.0 / w.eta[k] : w.eta[k];
        out(off) = f * (w0 * v0 + sgn * dot);
        out.segment(off + 1, q - 1) = f * (v1 + (dot / (1.0 + w0) + sgn * v0) * w1);
    }
    return out;
}

class KktSystem {
public:
    KktSystem(const StandardForm& f, double reg) : f_(f), reg_(reg) {
        const Layout& lay = f.layout;
        dim_ = lay.n + lay.p + lay.m;
        std::vector<Eigen::Triplet<double>> t;
        for (Index i = 0; i < lay.n; ++i) t.emplace_back(i, i, reg_);
        for (Index i = 0; i < lay.p; ++i) t.emplace_back(lay.n + i, lay.n + i, -reg_);
        for (Index col = 0; col < f.a.outerSize(); ++col)
            for (SpMat::InnerIterator it(f.a, col); it; ++it) {
                t.emplace_back(lay.n + it.row(), col, it.value());
                t.emplace_back(col, lay.n + it.row(), it.value());
            }
        const Index zo = lay.n + lay.p;
        for (Index col = 0; col < f.g.outerSize(); ++col)
            for (SpMat::InnerIterator it(f.g, col); it; ++it) {
                t.emplace_back(zo + it.row(), col, it.value());
                t.emplace_back(col, zo + it.row(), it.value());
            }
        for (Index i = 0; i < lay.l; ++i) t.emplace_back(zo + i, zo + i, -1.0);
        for (std::size_t k = 0; k < lay.soc_dim.size(); ++k) {
            const Index off = zo + lay.soc_offset[k];
            for (Index i = 0; i < lay.soc_dim[k]; ++i)
                for (Index j = 0; j < lay.soc_dim[k]; ++j) t.emplace_back(off + i, off + j, i == j ? -1.0 : 0.0);
        }
        k_.resize(dim_, dim_);
        k_.setFromTriplets(t.begin(), t.end());
        k_.makeCompressed();
        nn_diag_.resize(static_cast<std::size_t>(lay.l));
        for (Index i = 0; i < lay.l; ++i) nn_diag_[static_cast<std::size_t>(i)] = &k_.coeffRef(zo + i, zo + i);
        soc_entries_.resize(lay.soc_dim.size());
        for (std::size_t k = 0; k < lay.soc_dim.size(); ++k) {
            const Index off = zo + lay.soc_offset[k];
            const Index q = lay.soc_dim[k];
            auto& ptrs = soc_entries_[k];
            ptrs.resize(static_cast<std::size_t>(q * q));
            for (Index i = 0; i < q; ++i)
                for (Index j = 0; j < q; ++j) ptrs[static_cast<std::size_t>(i * q + j)] = &k_.coeffRef(off + i, off + j);
        }
        for (Index i = 0; i < lay.n + lay.p; ++i) xy_diag_.push_back(&k_.coeffRef(i, i));
        reg_diag_ = RVec::Zero(dim_);
        ldlt_.analyzePattern(k_);
    }

    // Sets the (3,3) block to -(W^2) (identity scaling when w is null) and factors.
    // Retries with stronger regularization when a pivot vanishes; iterative
    // refinement in solve() works against the unregularized matrix.
    bool factor(const Scaling* w) {
        for (double reg = reg_; reg <= 1e-5; reg *= 100.0) {
            if (factor_with(w, reg)) return true;
        }
        return false;
    }

    RVec solve(const RVec& rhs) const {
        RVec sol = ldlt_.solve(rhs);
        const double target = 1e-14 * (1.0 + rhs.cwiseAbs().maxCoeff());
        double last = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 10; ++it) {
            const RVec res = rhs - (k_ * sol - reg_diag_.cwiseProduct(sol));
            const double norm = res.cwiseAbs().maxCoeff();
            if (!(norm > target) || norm > 0.5 * last) break;
            last = norm;
            sol += ldlt_.solve(res);
        }
        return sol;
    }

private:
    bool factor_with(const Scaling* w, double reg) {
        const Layout& lay = f_.layout;
        for (Index i = 0; i < lay.n + lay.p; ++i) *xy_diag_[static_cast<std::size_t>(i)] = i < lay.n ? reg : -reg;
        reg_diag_.head(lay.n).setConstant(reg);
        reg_diag_.tail(dim_ - lay.n).setConstant(-reg);
        for (Index i = 0; i < lay.l; ++i) {
            const double w2 = w ? w->nn(i) * w->nn(i) : 1.0;
            *nn_diag_[static_cast<std::size_t>(i)] = -w2 - reg;
        }
        for (std::size_t k = 0; k < lay.soc_dim.size(); ++k) {
            const Index q = lay.soc_dim[k];
            auto& ptrs = soc_entries_[k];
            for (Index i = 0; i < q; ++i) {
                for (Index j = 0; j < q; ++j) {
                    double v = i == j ? 1.0 : 0.0;
                    if (w) {
                        // W^2 = eta^2 (2 wbar wbar^T - J)
                        const RVec& wb = w->wbar[k];
                        const double jij = i == j ? (i == 0 ? 1.0 : -1.0) : 0.0;
                        v = w->eta[k] * w->eta[k] * (2.0 * wb(i) * wb(j) - jij);
                    }
                    *ptrs[static_cast<std::size_t>(i * q + j)] = -v - (i == j ? reg : 0.0);
                }
            }
        }
        ldlt_.factorize(k_);
        return ldlt_.info() == Eigen::Success && ldlt_.vectorD().allFinite();
    }

    const StandardForm& f_;
    double reg_;
    Index dim_ = 0;
    SpMat k_;
    RVec reg_diag_;
    std::vector<double*> xy_diag_;
    std::vector<double*> nn_diag_;
    std::vector<std::vector<double*>> soc_entries_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

double inf_norm(const RVec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

ConicSolution finish(const ConicProgram& program, const StandardForm& f, SolveStatus status,
                     const RVec& x, const RVec& y, const RVec& z, double scale, int iterations) {
    ConicSolution sol;
    sol.status = status;
    sol.iterations = iterations;
    sol.x = x / scale;
    const auto& blocks = program.constraints();
    sol.duals.resize(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const Index r0 = f.layout.block_row[k];
        const Index rows = blocks[k].rows.rows();
        if (blocks[k].kind == ConeKind::Zero) sol.duals[k] = -y.segment(r0, rows) / scale;
        else sol.duals[k] = z.segment(r0, rows) / scale;
    }
    sol.residuals = kkt_residuals(program, sol);
    sol.objective = sol.residuals.primal_objective;
    sol.dual_objective = sol.residuals.dual_objective;
    return sol;
}

}  // namespace

ConicSolution solve(const ConicProgram& program, const SolverOptions& options) {
    program.validate();
    const StandardForm f = to_standard_form(program);
    const Layout& lay = f.layout;
    const ConeOps cones(lay);
    const double tol = options.tol;

    const Index n = lay.n;
    const Index p = lay.p;
    const Index m = lay.m;
    const double bh_scale = 1.0 + std::max(inf_norm(f.b), inf_norm(f.h));
    const double c_scale = 1.0 + inf_norm(f.c);

    KktSystem kkt(f, 1e-9);
    auto split = [&](const RVec& v, RVec& vx, RVec& vy, RVec& vz) {
        vx = v.head(n);
        vy = v.segment(n, p);
        vz = v.tail(m);
    };
    auto stack = [&](const RVec& vx, const RVec& vy, const RVec& vz) {
        RVec v(n + p + m);
        v << vx, vy, vz;
        return v;
    };

    // Starting point from two least-squares style solves with identity scaling.
    if (!kkt.factor(nullptr)) {
        return finish(program, f, SolveStatus::NumericalFailure, RVec::Zero(n), RVec::Zero(p), RVec::Zero(m), 1.0, 0);
    }
    RVec x, y, z, s, tmp;
    split(kkt.solve(stack(RVec::Zero(n), f.b, f.h)), x, tmp, s);
    s = -s;
    split(kkt.solve(stack(-f.c, RVec::Zero(p), RVec::Zero(m))), tmp, y, z);
    const RVec e = cones.identity();
    if (m > 0) {
        const double ap = cones.min_shift(s);
        if (ap >= 0.0) s += (1.0 + ap) * e;
        const double ad = cones.min_shift(z);
        if (ad >= 0.0) z += (1.0 + ad) * e;
    }
    double tau = 1.0;
    double kappa = 1.0;
    const double degree = static_cast<double>(cones.degree()) + 1.0;

    Scaling w;
    double best_merit = std::numeric_limits<double>::infinity();
    RVec best_x = x, best_y = y, best_z = z;
    double best_tau = tau;

    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        const RVec rx = f.a.transpose() * y + f.g.transpose() * z + f.c * tau;
        const RVec ry = f.a * x - f.b * tau;
        const RVec rz = s + f.g * x - f.h * tau;
        const double cx = f.c.dot(x);
        const double byhz = f.b.dot(y) + f.h.dot(z);
        const double rt = kappa + cx + byhz;

        const double pcost = cx / tau;
        const double dcost = -byhz / tau;
        const double pres = std::max(inf_norm(ry), inf_norm(rz)) / tau / bh_scale;
        const double dres = inf_norm(rx) / tau / c_scale;
        const double sz = s.dot(z);
        const double gap = std::max(std::fabs(pcost - dcost), sz / (tau * tau)) / (1.0 + std::fabs(pcost));
        const double merit = std::max({pres, dres, gap});
        if (merit < best_merit) {
            best_merit = merit;
            best_x = x;
            best_y = y;
            best_z = z;
            best_tau = tau;
        }
        if (pres <= tol && dres <= tol && gap <= tol) {
            return finish(program, f, SolveStatus::Optimal, x, y, z, tau, iter);
        }
        if (byhz < 0.0) {
            const double pinf = inf_norm(f.a.transpose() * y + f.g.transpose() * z) / -byhz;
            if (pinf <= tol) return finish(program, f, SolveStatus::Infeasible, x, y, z, -byhz, iter);
        }
        if (cx < 0.0) {
            const double dinf = std::max(inf_norm(f.a * x), inf_norm(f.g * x + s)) / -cx;
            if (dinf <= tol) return finish(program, f, SolveStatus::Unbounded, x, y, z, -cx, iter);
        }
        if (iter == options.max_iterations) break;

        if (!compute_scaling(lay, s, z, w)) break;
        w.lambda = apply_w(lay, w, z, false);
        if (!kkt.factor(&w)) break;

        RVec x1, y1, z1;
        split(kkt.solve(stack(-f.c, f.b, f.h)), x1, y1, z1);
        const double denom = f.c.dot(x1) + f.b.dot(y1) + f.h.dot(z1) - kappa / tau;
        const double mu = (sz + tau * kappa) / degree;
        const RVec lam_sq = cones.circ(w.lambda, w.lambda);

        struct Direction {
            RVec dx, dy, dz, ds;
            double dtau = 0.0, dkappa = 0.0;
        };
        auto direction = [&](const RVec& ds_target, double dk_target, double eta) {
            Direction d;
            const RVec ws = cones.circ_solve(w.lambda, ds_target);
            const RVec wws = apply_w(lay, w, ws, false);
            RVec x2, y2, z2;
            split(kkt.solve(stack(-eta * rx, -eta * ry, -eta * rz - wws)), x2, y2, z2);
            d.dtau = (-eta * rt - dk_target / tau - (f.c.dot(x2) + f.b.dot(y2) + f.h.dot(z2))) / denom;
            d.dx = x2 + d.dtau * x1;
            d.dy = y2 + d.dtau * y1;
            d.dz = z2 + d.dtau * z1;
            d.ds = apply_w(lay, w, ws - apply_w(lay, w, d.dz, false), false);
            d.dkappa = (dk_target - kappa * d.dtau) / tau;
            return d;
        };
        auto step_length = [&](const Direction& d, double cap) {
            double a = cap;
            if (m > 0) {
                a = std::min(a, cones.max_step(s, d.ds, cap));
                a = std::min(a, cones.max_step(z, d.dz, cap));
            }
            if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
            if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
            return a;
        };

        const Direction aff = direction(-lam_sq, -tau * kappa, 1.0);
        const double alpha_aff = step_length(aff, 1.0);
        const double sigma = std::pow(std::max(0.0, 1.0 - alpha_aff), 3);

        const RVec corr = cones.circ(apply_w(lay, w, aff.ds, true), apply_w(lay, w, aff.dz, false));
        const RVec ds_target = -lam_sq + sigma * mu * e - corr;
        const double dk_target = -tau * kappa + sigma * mu - aff.dtau * aff.dkappa;
        const Direction dir = direction(ds_target, dk_target, 1.0 - sigma);
        const double alpha = std::min(1.0, 0.99 * step_length(dir, 1.0 / 0.99));
        if (!(alpha > 1e-12) || !dir.dx.allFinite()) break;

        x += alpha * dir.dx;
        y += alpha * dir.dy;
        z += alpha * dir.dz;
        s += alpha * dir.ds;
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
    }
    return finish(program, f, SolveStatus::NumericalFailure, best_x, best_y, best_z, best_tau,
                  options.max_iterations);
}

ConicSolution solve(const ConicProgram& program, double tol) {
    SolverOptions options;
    options.tol = tol;
    return solve(program, options);
}

ConicSolution solve(const ConicProgram& program) { return solve(program, default_solver_tolerance()); }

}  // namespace cczsg
