#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "expr.hpp"
#include "linalg.hpp"

namespace randlmi {

struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// Uncertain parameters with their box. Order fixes the sample layout.
class ParamTable {
public:
    struct Entry {
        std::string name;
        double nominal = 0.0;
        double lower = 0.0;
        double upper = 0.0;
    };

    ParamTable() = default;
    explicit ParamTable(std::vector<Entry> entries);

    size_t size() const { return entries_.size(); }
    const Entry& at(size_t i) const { return entries_[i]; }
    const std::vector<Entry>& entries() const { return entries_; }
    int index_of(const std::string& name) const;  // -1 if absent

    std::vector<std::string> names() const;
    std::vector<double> nominal_values() const;

private:
    std::vector<Entry> entries_;
};

enum class VarGroup { X, Y };

// Packed decision-variable layout. Scalars take one slot; symmetric matrix
// variables take dim*(dim+1)/2 slots (upper triangle, row major). Variables
// are packed in declaration order, all x-group entries first, then y-group.
class DecisionLayout {
public:
    struct Variable {
        std::string name;
        int dim = 0;  // 0 => scalar
        VarGroup group = VarGroup::X;
    };

    DecisionLayout() = default;
    explicit DecisionLayout(std::vector<Variable> vars);

    int m_theta() const { return m_x_ + m_y_; }
    int m_x() const { return m_x_; }
    int m_y() const { return m_y_; }

    const std::vector<Variable>& variables() const { return vars_; }

    // Packed index of a scalar variable or a matrix entry "name[i,j]".
    // Matrix indices are 0-based; (i,j) and (j,i) map to the same slot.
    int index_of(const std::string& name) const;
    int index_of_entry(const std::string& var, int i, int j) const;

    // Entry name for a packed index, e.g. "X[0,2]" or "gamma".
    std::string entry_name(int packed_index) const;
    VarGroup group_of(int packed_index) const;

    // Parses "name" or "name[i,j]" and returns the packed index.
    // Throws ModelError for unknown names or out-of-range indices.
    int parse_entry(const std::string& text) const;

private:
    std::vector<Variable> vars_;
    std::vector<int> offsets_;  // packed offset per variable
    std::vector<int> owner_;    // variable index per packed slot
    int m_x_ = 0;
    int m_y_ = 0;
};

// One n x n symmetric constraint block, positive (semi)definite required.
// Entry grids are full n x n expression grids; absent cells are zero.
struct ConstraintBlock {
    std::string name;
    int dim = 0;
    bool strict = true;

    using Grid = std::vector<ExprPtr>;  // dim*dim, row major, null => 0

    Grid constant;                       // F0
    std::map<int, Grid> linear;          // packed theta index -> grid
    std::map<std::pair<int, int>, Grid> bilinear;  // (x index, y index) -> grid
};

// Constraint block instantiated at one sampled q: constant coefficient
// matrices of the (still theta-dependent) matrix inequality.
struct InstantiatedConstraint {
    int dim = 0;
    bool strict = true;
    Mat constant;
    std::map<int, Mat> linear;
    std::map<std::pair<int, int>, Mat> bilinear;

    // Assembles the block value at a packed design vector.
    Mat assemble(std::span<const double> theta) const;
};

enum class ProblemKind { LMI, BMI };

struct UncertainProblem {
    std::string name;
    ParamTable params;
    DecisionLayout layout;
    std::vector<double> objective;  // c_theta, length m_theta
    std::vector<ConstraintBlock> blocks;

    ProblemKind kind() const;

    // Sum of block dimensions, the n used by VC-dimension bounds.
    int n_for_bounds() const;

    // True when every block is strict; bound formulas use the nonstrict
    // variant as soon as any block is nonstrict.
    bool all_strict() const;

    void validate() const;  // invariant checks, throws ModelError
};

// Evaluates every block of p at the sample q (values in ParamTable order).
// Checks the evaluated matrices for symmetry within 1e-12 * |M|_inf and
// symmetrizes exactly. Throws EvalError / ModelError.
std::vector<InstantiatedConstraint> instantiate(const UncertainProblem& p,
                                                std::span<const double> q);

// Constraint-violation indicator: 0 iff every block, assembled at (theta, q),
// passes its definiteness check; 1 otherwise.
int indicator_g(const UncertainProblem& p, std::span<const double> theta,
                std::span<const double> q);

enum class MinorMode { Leading, All };

// Principal-minor definiteness oracle. Leading mode: all n leading principal
// minors strictly positive. All mode: all 2^n - 1 nonempty principal minors
// nonnegative (dim <= 12).
bool principal_minors_check(const Mat& m, MinorMode mode);

}  // namespace randlmi
