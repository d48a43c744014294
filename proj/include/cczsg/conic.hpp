#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Sparse>

#include "cczsg/complex_core.hpp"
#include "json.hpp"

namespace cczsg {

enum class ConeKind { Zero, NonNeg, SOC };
enum class Sense { Minimize, Maximize };
enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string_view to_string(ConeKind kind);
std::string_view to_string(SolveStatus status);

struct VarBlock {
    std::string name;
    Eigen::Index offset = 0;
    Eigen::Index size = 0;
};

/// Rows of an affine expression E x + e over the flat variable space.
class AffineRows {
public:
    explicit AffineRows(Eigen::Index rows = 0);

    Eigen::Index rows() const { return constant_.size(); }

    AffineRows& add(Eigen::Index row, Eigen::Index var, double coef);
    /// Adds m(i, j) at (row0 + i, var0 + j); exact zeros are skipped.
    AffineRows& add_block(Eigen::Index row0, Eigen::Index var0, const RMat& m);
    AffineRows& add_identity(Eigen::Index row0, Eigen::Index var0, Eigen::Index n, double scale = 1.0);
    AffineRows& add_constant(Eigen::Index row, double value);

    const std::vector<Eigen::Triplet<double>>& entries() const { return entries_; }
    const RVec& constant() const { return constant_; }
    RVec evaluate(const RVec& x) const;

private:
    std::vector<Eigen::Triplet<double>> entries_;
    RVec constant_;
};

/// E x + e in the cone: = 0 (Zero), >= 0 (NonNeg), or (t, w) with ||w|| <= t (SOC, first row is t).
struct ConstraintBlock {
    std::string name;
    ConeKind kind = ConeKind::Zero;
    AffineRows rows;
};

class ConicProgram {
public:
    explicit ConicProgram(Sense sense = Sense::Minimize) : sense_(sense) {}

    VarBlock add_variables(const std::string& name, Eigen::Index size);
    const VarBlock& var(const std::string& name) const;
    bool has_var(const std::string& name) const;
    Eigen::Index num_vars() const { return num_vars_; }
    const std::vector<VarBlock>& variables() const { return vars_; }

    Sense sense() const { return sense_; }
    void add_objective(Eigen::Index var, double coef);
    void add_objective_constant(double value) { objective_constant_ += value; }
    /// Objective in the user's sense.
    RVec objective() const;
    double objective_constant() const { return objective_constant_; }

    std::size_t add_constraint(const std::string& name, ConeKind kind, AffineRows rows);
    const std::vector<ConstraintBlock>& constraints() const { return blocks_; }

    /// Throws MalformedProgram when an index is out of range or a cone is ill-shaped.
    void validate() const;

    /// Stable debug dump: sense, objective, variable map and cone blocks.
    nlohmann::ordered_json dump() const;

private:
    Sense sense_;
    Eigen::Index num_vars_ = 0;
    std::vector<VarBlock> vars_;
    std::vector<double> objective_;
    double objective_constant_ = 0.0;
    std::vector<ConstraintBlock> blocks_;
};

/// Absolute and scaled residuals of a primal-dual pair.
struct ResidualReport {
    double primal_abs = 0.0;  // max violation of E x + e in K
    double dual_abs = 0.0;    // |c - sum E^T pi|_inf plus dual-cone violation
    double gap_abs = 0.0;     // |primal objective - dual objective|
    double primal = 0.0;      // scaled by 1 + max |e|_inf
    double dual = 0.0;        // scaled by 1 + |c|_inf
    double gap = 0.0;         // scaled by 1 + |primal objective|
    double primal_objective = 0.0;
    double dual_objective = 0.0;
};

struct ConicSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    RVec x;
    /// Per constraint block multiplier pi_k, with c = sum_k E_k^T pi_k (min form)
    /// and pi_k in the dual cone (free for Zero blocks).
    std::vector<RVec> duals;
    double objective = 0.0;
    double dual_objective = 0.0;
    ResidualReport residuals;
    int iterations = 0;

    RVec value(const ConicProgram& p, const std::string& name) const;
};

struct SolverOptions {
    double tol = 1e-8;
    int max_iterations = 100;
};

/// 1e-8 unless the CCZSG_SOLVER_TOL environment variable holds a positive number.
double default_solver_tolerance();

ConicSolution solve(const ConicProgram& program, const SolverOptions& options);
ConicSolution solve(const ConicProgram& program, double tol);
ConicSolution solve(const ConicProgram& program);

/// Recomputes feasibility and gap of (x, duals) independently of the solver.
ResidualReport kkt_residuals(const ConicProgram& program, const ConicSolution& solution);

}  // namespace cczsg
