#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lopashka/error.hpp"
#include "lopashka/problem_io.hpp"

namespace lopashka::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFail = 2;

// Dispatches one command line (without the program name).  Reports go to `out`
// unless redirected with --out / --report; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Exit code for a library error: verification failures map to 2, everything else to 1.
int exit_code_for(ErrorKind kind);

// 64-bit FNV-1a hash.
std::uint64_t fnv1a64(std::string_view text);

// A problem document, or a document {"fixture": NAME, ...} naming a built-in fixture.
Problem resolve_problem(const nlohmann::json& doc);
Problem load_problem_file(const std::string& path);

// "1+0i", "-2.5", "3i", "1e-3-2e1i".
Complex parse_complex(const std::string& text);
// "256x256" -> {256, 256}.
std::vector<int> parse_grid(const std::string& text);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const;
};

// Outcome of one verification or analysis: named boolean verdicts plus free-form results.
struct Outcome {
  nlohmann::json results = nlohmann::json::object();
  nlohmann::json verdicts = nlohmann::json::object();
  Table table;

  bool passed() const;
};

// Fixed-format number for tables ("%.17g").
std::string format_number(double x);

// R-bound suites: definition, neumann, sector, mikhlin, combinatorial.
std::vector<std::string> rbound_suite_names();
Outcome run_rbound_suite(const std::string& suite, std::uint64_t seed);

}  // namespace lopashka::cli
