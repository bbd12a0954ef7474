#include "lopashka/frequency.hpp"

#include <sstream>

#include "lopashka/error.hpp"

namespace lopashka {

std::string format_frequency(std::span<const double> xi_prime) {
  std::ostringstream os;
  os << "xi' = (";
  for (std::size_t i = 0; i < xi_prime.size(); ++i) os << (i ? ", " : "") << xi_prime[i];
  os << ")";
  return os.str();
}

FrequencySetup setup_frequency(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec, Complex lambda,
                               std::span<const double> xi_prime) {
  const int m = sym.half_order();
  try {
    FrequencySetup f;
    f.scaled = scale_variables(lambda, xi_prime, m);
    const auto b = to_complex(f.scaled.b);
    f.companion = build_companion(sym, b, f.scaled.sigma);
    f.split = spectral_split(f.companion);
    f.rows = boundary_rows(spec, b);
    f.map = build_solution_map(f.companion, f.rows, f.split);
    return f;
  } catch (const Error& e) {
    std::string what = e.what();
    const std::string prefix = std::string(to_string(e.kind())) + ": ";
    if (what.rfind(prefix, 0) == 0) what = what.substr(prefix.size());
    throw Error(e.kind(), what + " [at " + format_frequency(xi_prime) + "]");
  }
}

}  // namespace lopashka
