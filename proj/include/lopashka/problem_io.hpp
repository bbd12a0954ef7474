#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "lopashka/symbol.hpp"

namespace lopashka {

// Interior symbol, boundary operator and optional free-form payload (for
// example manufactured data) as read from a problem document.
struct Problem {
  std::string name;
  InteriorSymbol symbol;
  BoundaryOperatorSpec boundary;
  nlohmann::json extra = nlohmann::json::object();
};

Problem problem_from_json(const nlohmann::json& doc);
nlohmann::json problem_to_json(const Problem& problem);

// Parses text; syntax errors are reported with line and column.
Problem parse_problem(const std::string& text);
Problem load_problem(const std::string& path);

nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& re, const nlohmann::json* im, int rows, int cols,
                         const std::string& where);

// Line and column (1-based) of a byte offset in a text.
std::pair<int, int> line_column(const std::string& text, std::size_t offset);

}  // namespace lopashka
