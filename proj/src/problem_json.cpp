#include "problem_json.hpp"

#include <json.hpp>

#include "util.hpp"

namespace randlmi {

using nlohmann::ordered_json;

namespace {

const ordered_json& require(const ordered_json& obj, const std::string& key,
                            const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(path, "missing required field '" + key + "'");
    return *it;
}

double number_at(const ordered_json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path, "expected a number");
    return v.get<double>();
}

std::string string_at(const ordered_json& v, const std::string& path) {
    if (!v.is_string()) throw SchemaError(path, "expected a string");
    return v.get<std::string>();
}

std::pair<int, int> parse_cell_key(const std::string& key, int dim, const std::string& path) {
    size_t comma = key.find(',');
    if (comma == std::string::npos)
        throw SchemaError(path, "entry key must be 'row,col', got '" + key + "'");
    int i, j;
    try {
        i = std::stoi(key.substr(0, comma));
        j = std::stoi(key.substr(comma + 1));
    } catch (const std::exception&) {
        throw SchemaError(path, "entry key must be 'row,col', got '" + key + "'");
    }
    if (i < 0 || j < 0 || i >= dim || j >= dim)
        throw SchemaError(path, "entry '" + key + "' out of range for dimension " +
                                    std::to_string(dim));
    return {i, j};
}

ConstraintBlock::Grid parse_grid(const ordered_json& obj, int dim, const std::string& path) {
    if (!obj.is_object()) throw SchemaError(path, "expected an object of 'row,col' entries");
    ConstraintBlock::Grid grid(static_cast<size_t>(dim) * dim);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        auto [i, j] = parse_cell_key(it.key(), dim, path);
        std::string text = string_at(it.value(), path + "." + it.key());
        ExprPtr e;
        try {
            e = parse_expr(text);
        } catch (const ParseError& pe) {
            throw SchemaError(path + "." + it.key(),
                              std::string(pe.what()) + " at byte " + std::to_string(pe.offset) +
                                  " in '" + text + "'");
        }
        grid[static_cast<size_t>(i) * dim + j] = std::move(e);
    }
    // mirror: a cell given on one side of the diagonal fills the other
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            ExprPtr& u = grid[static_cast<size_t>(i) * dim + j];
            ExprPtr& l = grid[static_cast<size_t>(j) * dim + i];
            if (u && !l) l = u;
            if (l && !u) u = l;
        }
    return grid;
}

std::pair<std::string, std::string> split_pair_key(const std::string& key,
                                                   const std::string& path) {
    size_t star = key.find('*');
    if (star == std::string::npos)
        throw SchemaError(path, "bilinear key must be 'x_entry * y_entry', got '" + key + "'");
    auto trim = [](std::string s) {
        size_t b = s.find_first_not_of(" \t");
        size_t e = s.find_last_not_of(" \t");
        if (b == std::string::npos) return std::string();
        return s.substr(b, e - b + 1);
    };
    return {trim(key.substr(0, star)), trim(key.substr(star + 1))};
}

}  // namespace

UncertainProblem load_problem_json(const std::string& json_text) {
    ordered_json root;
    try {
        root = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("$", std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw SchemaError("$", "top-level value must be an object");

    UncertainProblem p;
    if (root.contains("name")) p.name = string_at(root["name"], "name");

    // parameters
    const ordered_json& params = require(root, "parameters", "$");
    if (!params.is_array()) throw SchemaError("parameters", "expected an array");
    std::vector<ParamTable::Entry> entries;
    for (size_t i = 0; i < params.size(); ++i) {
        std::string path = "parameters[" + std::to_string(i) + "]";
        const ordered_json& pj = params[i];
        if (!pj.is_object()) throw SchemaError(path, "expected an object");
        ParamTable::Entry e;
        e.name = string_at(require(pj, "name", path), path + ".name");
        e.nominal = number_at(require(pj, "nominal", path), path + ".nominal");
        e.lower = number_at(require(pj, "lower", path), path + ".lower");
        e.upper = number_at(require(pj, "upper", path), path + ".upper");
        entries.push_back(std::move(e));
    }
    try {
        p.params = ParamTable(std::move(entries));
    } catch (const ModelError& e) {
        throw SchemaError("parameters", e.what());
    }

    // variables
    const ordered_json& vars = require(root, "variables", "$");
    if (!vars.is_array() || vars.empty())
        throw SchemaError("variables", "expected a nonempty array");
    std::vector<DecisionLayout::Variable> vlist;
    for (size_t i = 0; i < vars.size(); ++i) {
        std::string path = "variables[" + std::to_string(i) + "]";
        const ordered_json& vj = vars[i];
        if (!vj.is_object()) throw SchemaError(path, "expected an object");
        DecisionLayout::Variable v;
        v.name = string_at(require(vj, "name", path), path + ".name");
        std::string kind = vj.contains("kind") ? string_at(vj["kind"], path + ".kind") : "scalar";
        if (kind == "scalar") {
            v.dim = 0;
        } else if (kind == "matrix") {
            double d = number_at(require(vj, "dim", path), path + ".dim");
            v.dim = static_cast<int>(d);
            if (v.dim < 1 || v.dim != d)
                throw SchemaError(path + ".dim", "matrix dimension must be a positive integer");
        } else {
            throw SchemaError(path + ".kind", "expected 'scalar' or 'matrix'");
        }
        std::string group = vj.contains("group") ? string_at(vj["group"], path + ".group") : "x";
        if (group == "x")
            v.group = VarGroup::X;
        else if (group == "y")
            v.group = VarGroup::Y;
        else
            throw SchemaError(path + ".group", "expected 'x' or 'y'");
        vlist.push_back(std::move(v));
    }
    try {
        p.layout = DecisionLayout(std::move(vlist));
    } catch (const ModelError& e) {
        throw SchemaError("variables", e.what());
    }

    // objective
    p.objective.assign(static_cast<size_t>(p.layout.m_theta()), 0.0);
    if (root.contains("objective")) {
        const ordered_json& obj = root["objective"];
        if (!obj.is_object()) throw SchemaError("objective", "expected an object");
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            int idx;
            try {
                idx = p.layout.parse_entry(it.key());
            } catch (const ModelError& e) {
                throw SchemaError("objective." + it.key(), e.what());
            }
            p.objective[idx] = number_at(it.value(), "objective." + it.key());
        }
    }

    // blocks
    const ordered_json& blocks = require(root, "blocks", "$");
    if (!blocks.is_array() || blocks.empty())
        throw SchemaError("blocks", "expected a nonempty array");
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
        std::string path = "blocks[" + std::to_string(bi) + "]";
        const ordered_json& bj = blocks[bi];
        if (!bj.is_object()) throw SchemaError(path, "expected an object");
        ConstraintBlock b;
        b.name = bj.contains("name") ? string_at(bj["name"], path + ".name")
                                     : "block" + std::to_string(bi);
        double d = number_at(require(bj, "dim", path), path + ".dim");
        b.dim = static_cast<int>(d);
        if (b.dim < 1 || b.dim != d)
            throw SchemaError(path + ".dim", "block dimension must be a positive integer");
        if (bj.contains("strict")) {
            if (!bj["strict"].is_boolean()) throw SchemaError(path + ".strict", "expected a bool");
            b.strict = bj["strict"].get<bool>();
        }
        b.constant = bj.contains("constant")
                         ? parse_grid(bj["constant"], b.dim, path + ".constant")
                         : ConstraintBlock::Grid(static_cast<size_t>(b.dim) * b.dim);
        if (bj.contains("linear")) {
            const ordered_json& lin = bj["linear"];
            if (!lin.is_object()) throw SchemaError(path + ".linear", "expected an object");
            for (auto it = lin.begin(); it != lin.end(); ++it) {
                std::string lpath = path + ".linear[" + it.key() + "]";
                int idx;
                try {
                    idx = p.layout.parse_entry(it.key());
                } catch (const ModelError& e) {
                    throw SchemaError(lpath, e.what());
                }
                if (b.linear.count(idx))
                    throw SchemaError(lpath, "duplicate linear grid for this entry");
                b.linear.emplace(idx, parse_grid(it.value(), b.dim, lpath));
            }
        }
        if (bj.contains("bilinear")) {
            const ordered_json& bil = bj["bilinear"];
            if (!bil.is_object()) throw SchemaError(path + ".bilinear", "expected an object");
            for (auto it = bil.begin(); it != bil.end(); ++it) {
                std::string bpath = path + ".bilinear[" + it.key() + "]";
                auto [xs, ys] = split_pair_key(it.key(), bpath);
                int xi, yi;
                try {
                    xi = p.layout.parse_entry(xs);
                    yi = p.layout.parse_entry(ys);
                } catch (const ModelError& e) {
                    throw SchemaError(bpath, e.what());
                }
                if (p.layout.group_of(xi) != VarGroup::X)
                    throw SchemaError(bpath, "'" + xs + "' is not an x-group entry");
                if (p.layout.group_of(yi) != VarGroup::Y)
                    throw SchemaError(bpath, "'" + ys + "' is not a y-group entry");
                auto key = std::make_pair(xi, yi);
                if (b.bilinear.count(key))
                    throw SchemaError(bpath, "duplicate bilinear grid for this pair");
                b.bilinear.emplace(key, parse_grid(it.value(), b.dim, bpath));
            }
        }
        p.blocks.push_back(std::move(b));
    }

    try {
        p.validate();
    } catch (const ModelError& e) {
        throw SchemaError("$", e.what());
    }
    return p;
}

UncertainProblem load_problem_file(const std::string& path) {
    return load_problem_json(read_file(path));
}

std::string problem_to_json(const UncertainProblem& p) {
    ordered_json root;
    if (!p.name.empty()) root["name"] = p.name;
    root["parameters"] = ordered_json::array();
    for (const auto& e : p.params.entries())
        root["parameters"].push_back(
            {{"name", e.name}, {"nominal", e.nominal}, {"lower", e.lower}, {"upper", e.upper}});
    root["variables"] = ordered_json::array();
    for (const auto& v : p.layout.variables()) {
        ordered_json vj{{"name", v.name}};
        vj["kind"] = v.dim == 0 ? "scalar" : "matrix";
        if (v.dim != 0) vj["dim"] = v.dim;
        vj["group"] = v.group == VarGroup::X ? "x" : "y";
        root["variables"].push_back(std::move(vj));
    }
    root["objective"] = ordered_json::object();
    for (size_t i = 0; i < p.objective.size(); ++i)
        if (p.objective[i] != 0.0)
            root["objective"][p.layout.entry_name(static_cast<int>(i))] = p.objective[i];
    root["blocks"] = ordered_json::array();
    for (const ConstraintBlock& b : p.blocks) {
        ordered_json bj{{"name", b.name}, {"dim", b.dim}, {"strict", b.strict}};
        auto grid_json = [&](const ConstraintBlock::Grid& g) {
            ordered_json out = ordered_json::object();
            for (int i = 0; i < b.dim; ++i)
                for (int j = i; j < b.dim; ++j) {
                    const ExprPtr& e = g[static_cast<size_t>(i) * b.dim + j];
                    if (e) out[std::to_string(i) + "," + std::to_string(j)] = to_string(*e);
                }
            return out;
        };
        ordered_json cj = grid_json(b.constant);
        if (!cj.empty()) bj["constant"] = std::move(cj);
        if (!b.linear.empty()) {
            ordered_json lj = ordered_json::object();
            for (const auto& [idx, g] : b.linear) lj[p.layout.entry_name(idx)] = grid_json(g);
            bj["linear"] = std::move(lj);
        }
        if (!b.bilinear.empty()) {
            ordered_json blj = ordered_json::object();
            for (const auto& [pair, g] : b.bilinear)
                blj[p.layout.entry_name(pair.first) + " * " + p.layout.entry_name(pair.second)] =
                    grid_json(g);
            bj["bilinear"] = std::move(blj);
        }
        root["blocks"].push_back(std::move(bj));
    }
    return root.dump(2);
}

}  // namespace randlmi
