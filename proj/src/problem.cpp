#include "problem.hpp"

#include <algorithm>
#include <cmath>

namespace randlmi {

ParamTable::ParamTable(std::vector<Entry> entries) : entries_(std::move(entries)) {
    for (size_t i = 0; i < entries_.size(); ++i) {
        const Entry& e = entries_[i];
        if (e.name.empty()) throw ModelError("parameter with empty name");
        if (!(e.lower <= e.nominal && e.nominal <= e.upper))
            throw ModelError("parameter '" + e.name + "': requires lower <= nominal <= upper");
        for (size_t j = 0; j < i; ++j)
            if (entries_[j].name == e.name)
                throw ModelError("duplicate parameter name '" + e.name + "'");
    }
}

int ParamTable::index_of(const std::string& name) const {
    for (size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].name == name) return static_cast<int>(i);
    return -1;
}

std::vector<std::string> ParamTable::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.push_back(e.name);
    return out;
}

std::vector<double> ParamTable::nominal_values() const {
    std::vector<double> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.push_back(e.nominal);
    return out;
}

namespace {
int slots_of(const DecisionLayout::Variable& v) {
    return v.dim == 0 ? 1 : v.dim * (v.dim + 1) / 2;
}
}  // namespace

DecisionLayout::DecisionLayout(std::vector<Variable> vars) : vars_(std::move(vars)) {
    for (size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i].name.empty()) throw ModelError("variable with empty name");
        if (vars_[i].dim < 0) throw ModelError("variable '" + vars_[i].name + "': negative dimension");
        for (size_t j = 0; j < i; ++j)
            if (vars_[j].name == vars_[i].name)
                throw ModelError("duplicate variable name '" + vars_[i].name + "'");
    }
    // x-group first, then y-group, declaration order within each group
    offsets_.assign(vars_.size(), -1);
    int off = 0;
    for (int pass = 0; pass < 2; ++pass) {
        VarGroup g = pass == 0 ? VarGroup::X : VarGroup::Y;
        for (size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i].group != g) continue;
            offsets_[i] = off;
            int s = slots_of(vars_[i]);
            for (int k = 0; k < s; ++k) owner_.push_back(static_cast<int>(i));
            off += s;
            (g == VarGroup::X ? m_x_ : m_y_) += s;
        }
    }
}

int DecisionLayout::index_of(const std::string& name) const {
    for (size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name == name) {
            if (vars_[i].dim != 0)
                throw ModelError("variable '" + name + "' is a matrix; use '" + name + "[i,j]'");
            return offsets_[i];
        }
    throw ModelError("unknown variable '" + name + "'");
}

int DecisionLayout::index_of_entry(const std::string& var, int i, int j) const {
    for (size_t v = 0; v < vars_.size(); ++v) {
        if (vars_[v].name != var) continue;
        int d = vars_[v].dim;
        if (d == 0) throw ModelError("variable '" + var + "' is a scalar; no entry indices");
        if (i < 0 || j < 0 || i >= d || j >= d)
            throw ModelError("entry " + var + "[" + std::to_string(i) + "," + std::to_string(j) +
                             "] out of range for dimension " + std::to_string(d));
        if (i > j) std::swap(i, j);
        // upper triangle, row major: offset of (i,j) with i<=j
        int within = i * d - i * (i - 1) / 2 + (j - i);
        return offsets_[v] + within;
    }
    throw ModelError("unknown variable '" + var + "'");
}

std::string DecisionLayout::entry_name(int packed_index) const {
    int vi = owner_.at(static_cast<size_t>(packed_index));
    const Variable& v = vars_[vi];
    if (v.dim == 0) return v.name;
    int within = packed_index - offsets_[vi];
    int i = 0;
    int row_len = v.dim;
    while (within >= row_len) {
        within -= row_len;
        --row_len;
        ++i;
    }
    int j = i + within;
    return v.name + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
}

VarGroup DecisionLayout::group_of(int packed_index) const {
    return vars_[owner_.at(static_cast<size_t>(packed_index))].group;
}

int DecisionLayout::parse_entry(const std::string& text) const {
    size_t br = text.find('[');
    if (br == std::string::npos) return index_of(text);
    if (text.back() != ']') throw ModelError("malformed entry reference '" + text + "'");
    std::string var = text.substr(0, br);
    std::string inner = text.substr(br + 1, text.size() - br - 2);
    size_t comma = inner.find(',');
    if (comma == std::string::npos) throw ModelError("malformed entry reference '" + text + "'");
    try {
        int i = std::stoi(inner.substr(0, comma));
        int j = std::stoi(inner.substr(comma + 1));
        return index_of_entry(var, i, j);
    } catch (const std::invalid_argument&) {
        throw ModelError("malformed entry reference '" + text + "'");
    } catch (const std::out_of_range&) {
        throw ModelError("malformed entry reference '" + text + "'");
    }
}

Mat InstantiatedConstraint::assemble(std::span<const double> theta) const {
    Mat m = constant;
    for (const auto& [idx, grid] : linear) m.add_scaled(grid, theta[idx]);
    for (const auto& [pair, grid] : bilinear)
        m.add_scaled(grid, theta[pair.first] * theta[pair.second]);
    return m;
}

ProblemKind UncertainProblem::kind() const {
    return layout.m_y() > 0 ? ProblemKind::BMI : ProblemKind::LMI;
}

int UncertainProblem::n_for_bounds() const {
    int n = 0;
    for (const ConstraintBlock& b : blocks) n += b.dim;
    return n;
}

bool UncertainProblem::all_strict() const {
    for (const ConstraintBlock& b : blocks)
        if (!b.strict) return false;
    return true;
}

void UncertainProblem::validate() const {
    if (blocks.empty()) throw ModelError("problem has no constraint blocks");
    if (static_cast<int>(objective.size()) != layout.m_theta())
        throw ModelError("objective length does not match packed variable count");
    auto check_grid = [&](const ConstraintBlock& b, const ConstraintBlock::Grid& g,
                          const std::string& where) {
        if (static_cast<int>(g.size()) != b.dim * b.dim)
            throw ModelError("block '" + b.name + "' " + where + ": grid size mismatch");
        for (const ExprPtr& e : g) {
            if (!e) continue;
            for (const std::string& p : free_params(*e))
                if (params.index_of(p) < 0)
                    throw ModelError("block '" + b.name + "' " + where +
                                     ": unknown parameter '" + p + "'");
        }
    };
    for (const ConstraintBlock& b : blocks) {
        if (b.dim <= 0) throw ModelError("block '" + b.name + "': dimension must be positive");
        check_grid(b, b.constant, "constant");
        for (const auto& [idx, g] : b.linear) {
            if (idx < 0 || idx >= layout.m_theta())
                throw ModelError("block '" + b.name + "': linear index out of range");
            check_grid(b, g, "linear[" + layout.entry_name(idx) + "]");
        }
        for (const auto& [pair, g] : b.bilinear) {
            if (layout.group_of(pair.first) != VarGroup::X ||
                layout.group_of(pair.second) != VarGroup::Y)
                throw ModelError("block '" + b.name + "': bilinear pair must couple an x-group "
                                 "entry with a y-group entry");
            check_grid(b, g, "bilinear[" + layout.entry_name(pair.first) + "*" +
                                 layout.entry_name(pair.second) + "]");
        }
        if (kind() == ProblemKind::LMI && !b.bilinear.empty())
            throw ModelError("block '" + b.name + "': bilinear grids in an LMI problem");
    }
}

namespace {

Mat eval_grid(const ConstraintBlock::Grid& grid, int dim, const ParamBinding& q,
              const std::string& where) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            const ExprPtr& e = grid[static_cast<size_t>(i) * dim + j];
            if (e) m(i, j) = eval_expr(*e, q);
        }
    double scale = m.norm_inf();
    if (m.asymmetry() > 1e-12 * std::max(1.0, scale))
        throw ModelError(where + ": evaluated matrix is asymmetric beyond tolerance");
    m.symmetrize();
    return m;
}

}  // namespace

std::vector<InstantiatedConstraint> instantiate(const UncertainProblem& p,
                                                std::span<const double> q) {
    if (q.size() != p.params.size())
        throw ModelError("sample length does not match parameter table");
    std::vector<std::string> names = p.params.names();
    ParamBinding binding{names, q};

    std::vector<InstantiatedConstraint> out;
    out.reserve(p.blocks.size());
    for (const ConstraintBlock& b : p.blocks) {
        InstantiatedConstraint ic;
        ic.dim = b.dim;
        ic.strict = b.strict;
        ic.constant = eval_grid(b.constant, b.dim, binding, "block '" + b.name + "' constant");
        for (const auto& [idx, g] : b.linear)
            ic.linear.emplace(idx, eval_grid(g, b.dim, binding,
                                             "block '" + b.name + "' linear term"));
        for (const auto& [pair, g] : b.bilinear)
            ic.bilinear.emplace(pair, eval_grid(g, b.dim, binding,
                                                "block '" + b.name + "' bilinear term"));
        out.push_back(std::move(ic));
    }
    return out;
}

int indicator_g(const UncertainProblem& p, std::span<const double> theta,
                std::span<const double> q) {
    if (static_cast<int>(theta.size()) != p.layout.m_theta())
        throw ModelError("theta length does not match packed variable count");
    std::vector<InstantiatedConstraint> inst = instantiate(p, q);
    for (const InstantiatedConstraint& ic : inst) {
        Mat m = ic.assemble(theta);
        double tau = definiteness_tolerance(m);
        bool ok = ic.strict ? is_positive_definite(m, tau) : is_positive_semidefinite(m, tau);
        if (!ok) return 1;
    }
    return 0;
}

namespace {

double principal_minor(const Mat& m, std::span<const int> rows) {
    Mat sub(static_cast<int>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows.size(); ++j)
            sub(static_cast<int>(i), static_cast<int>(j)) = m(rows[i], rows[j]);
    return determinant(std::move(sub));
}

}  // namespace

bool principal_minors_check(const Mat& m, MinorMode mode) {
    const int n = m.n();
    if (mode == MinorMode::Leading) {
        std::vector<int> rows;
        for (int k = 0; k < n; ++k) {
            rows.push_back(k);
            if (!(principal_minor(m, rows) > 0.0)) return false;
        }
        return true;
    }
    if (n > 12) throw ModelError("all-minors check limited to dimension 12");
    double scale = std::max(1.0, m.norm_inf());
    std::vector<int> rows;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        rows.clear();
        for (int k = 0; k < n; ++k)
            if (mask & (1u << k)) rows.push_back(k);
        // tolerance grows with minor order: determinants of size k carry
        // roundoff on the order of scale^k
        double tol = 1e-11 * std::pow(scale, static_cast<double>(rows.size()));
        if (principal_minor(m, rows) < -tol) return false;
    }
    return true;
}

}  // namespace randlmi
