#pragma once

#include <string>

#include "problem.hpp"

namespace randlmi {

struct SchemaError : std::runtime_error {
    std::string path;  // JSON path of the offending element
    SchemaError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path(path) {}
};

UncertainProblem load_problem_json(const std::string& json_text);
UncertainProblem load_problem_file(const std::string& path);

// Round trip used by tooling; emits the same schema load_problem_json reads.
std::string problem_to_json(const UncertainProblem& p);

}  // namespace randlmi
