#include "lopashka/problem_io.hpp"

#include <fstream>
#include <sstream>

#include "lopashka/error.hpp"

namespace lopashka {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorKind::Parse, where + ": missing field \"" + key + "\"");
  }
  return obj.at(key);
}

int require_int(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) {
    throw Error(ErrorKind::Parse, where + ": field \"" + key + "\" must be an integer");
  }
  return v.get<int>();
}

MultiIndex index_from_json(const json& v, int length, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != length) {
    throw Error(ErrorKind::Parse, where + ": multi-index must be an array of length " +
                                      std::to_string(length));
  }
  std::vector<int> e;
  for (const auto& x : v) {
    if (!x.is_number_integer() || x.get<int>() < 0) {
      throw Error(ErrorKind::Parse, where + ": multi-index entries must be non-negative integers");
    }
    e.push_back(x.get<int>());
  }
  return MultiIndex(e);
}

}  // namespace

std::pair<int, int> line_column(const std::string& text, std::size_t offset) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < text.size() && i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

CMatrix matrix_from_json(const json& re, const json* im, int rows, int cols, const std::string& where) {
  auto read = [&](const json& a, const char* part) {
    RMatrix out(rows, cols);
    if (!a.is_array() || static_cast<int>(a.size()) != rows) {
      throw Error(ErrorKind::Parse, where + ": \"" + part + "\" must have " + std::to_string(rows) +
                                        " rows");
    }
    for (int i = 0; i < rows; ++i) {
      if (!a[i].is_array() || static_cast<int>(a[i].size()) != cols) {
        throw Error(ErrorKind::Parse, where + ": \"" + part + "\" row " + std::to_string(i) +
                                          " must have " + std::to_string(cols) + " entries");
      }
      for (int k = 0; k < cols; ++k) {
        if (!a[i][k].is_number()) throw Error(ErrorKind::Parse, where + ": non-numeric entry");
        out(i, k) = a[i][k].get<double>();
      }
    }
    return out;
  };
  CMatrix m = read(re, "re").cast<Complex>();
  if (im) m += kI * read(*im, "im").cast<Complex>();
  return m;
}

json matrix_to_json(const CMatrix& m) {
  json re = json::array();
  json im = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    json c = json::array();
    for (int k = 0; k < m.cols(); ++k) {
      r.push_back(m(i, k).real());
      c.push_back(m(i, k).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  return json{{"re", re}, {"im", im}};
}

Problem problem_from_json(const json& doc) {
  const std::string root = "problem";
  if (!doc.is_object()) throw Error(ErrorKind::Parse, "problem document must be an object");
  const int m = require_int(doc, "m", root);
  const int n = require_int(doc, "n", root);
  const int N = require_int(doc, "N", root);
  if (m < 1 || n < 1 || N < 1) throw Error(ErrorKind::Parse, "problem: m, n, N must be positive");
  const int dim = n + 1;

  CoefficientMap interior;
  const json& terms = require(doc, "interior", root);
  if (!terms.is_array()) throw Error(ErrorKind::Parse, "problem: \"interior\" must be an array");
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string where = "interior[" + std::to_string(t) + "]";
    const MultiIndex alpha = index_from_json(require(terms[t], "alpha", where), dim, where);
    const json* im = terms[t].contains("im") ? &terms[t].at("im") : nullptr;
    CMatrix a = matrix_from_json(require(terms[t], "re", where), im, N, N, where);
    auto [it, inserted] = interior.emplace(alpha, a);
    if (!inserted) it->second += a;
  }
  InteriorSymbol sym(dim, N, std::move(interior));
  if (sym.order() != 2 * m) {
    throw Error(ErrorKind::Parse, "problem: interior symbol has order " + std::to_string(sym.order()) +
                                      " but m = " + std::to_string(m));
  }

  std::vector<BoundaryRow> rows;
  const json& brows = require(doc, "boundary", root);
  if (!brows.is_array()) throw Error(ErrorKind::Parse, "problem: \"boundary\" must be an array");
  for (std::size_t j = 0; j < brows.size(); ++j) {
    const std::string rwhere = "boundary[" + std::to_string(j) + "]";
    const json& comps = require(brows[j], "components", rwhere);
    if (!comps.is_array()) throw Error(ErrorKind::Parse, rwhere + ": components must be an array");
    BoundaryRow row;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      const std::string where = rwhere + ".components[" + std::to_string(c) + "]";
      const int k = require_int(comps[c], "k", where);
      const json& pj = require(comps[c], "projection", where);
      const json* pim = pj.contains("im") ? &pj.at("im") : nullptr;
      Projection proj(matrix_from_json(require(pj, "re", where + ".projection"), pim, N, N,
                                       where + ".projection"));
      CoefficientMap coeffs;
      const json& cj = require(comps[c], "coeffs", where);
      if (!cj.is_array()) throw Error(ErrorKind::Parse, where + ": coeffs must be an array");
      for (std::size_t t = 0; t < cj.size(); ++t) {
        const std::string cw = where + ".coeffs[" + std::to_string(t) + "]";
        const MultiIndex beta = index_from_json(require(cj[t], "beta", cw), dim, cw);
        const json* im = cj[t].contains("im") ? &cj[t].at("im") : nullptr;
        CMatrix b = matrix_from_json(require(cj[t], "re", cw), im, N, N, cw);
        auto [it, inserted] = coeffs.emplace(beta, b);
        if (!inserted) it->second += b;
      }
      row.components.push_back(BoundaryComponent{k, std::move(proj), std::move(coeffs)});
    }
    rows.push_back(std::move(row));
  }
  BoundaryOperatorSpec spec(sym, std::move(rows));

  Problem p{doc.value("name", std::string("unnamed")), std::move(sym), std::move(spec), json::object()};
  for (const auto& [key, value] : doc.items()) {
    if (key != "m" && key != "n" && key != "N" && key != "interior" && key != "boundary" &&
        key != "name") {
      p.extra[key] = value;
    }
  }
  return p;
}

json problem_to_json(const Problem& problem) {
  const auto& sym = problem.symbol;
  json doc;
  doc["name"] = problem.name;
  doc["m"] = sym.half_order();
  doc["n"] = sym.tangential_dim();
  doc["N"] = sym.components();
  json interior = json::array();
  for (const auto& [alpha, a] : sym.coefficients()) {
    json t = matrix_to_json(a);
    t["alpha"] = alpha.entries;
    interior.push_back(t);
  }
  doc["interior"] = interior;
  json boundary = json::array();
  for (const auto& row : problem.boundary.rows()) {
    json comps = json::array();
    for (const auto& comp : row.components) {
      json coeffs = json::array();
      for (const auto& [beta, b] : comp.coeffs) {
        json t = matrix_to_json(b);
        t["beta"] = beta.entries;
        coeffs.push_back(t);
      }
      comps.push_back(json{{"k", comp.order},
                           {"projection", matrix_to_json(comp.projection.matrix())},
                           {"coeffs", coeffs}});
    }
    boundary.push_back(json{{"components", comps}});
  }
  doc["boundary"] = boundary;
  for (const auto& [key, value] : problem.extra.items()) doc[key] = value;
  return doc;
}

Problem parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorKind::Parse, "malformed JSON at line " + std::to_string(line) + ", column " +
                                      std::to_string(col));
  }
  try {
    return problem_from_json(doc);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("invalid problem document: ") + e.what());
  }
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

}  // namespace lopashka
