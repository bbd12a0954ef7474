#pragma once

#include <span>
#include <string>
#include <vector>

#include "lopashka/lopatinskii.hpp"

namespace lopashka {

// Everything the half-space machinery needs at one tangential frequency.
struct FrequencySetup {
  ScaledVariables scaled;
  CompanionSystem companion;
  SpectralSplit split;
  std::vector<BoundaryRowMatrix> rows;
  SolutionMap map;
};

// Builds the scaled companion system, its spectral split and the solution map
// at (lambda, xi').  Failures are rethrown with the frequency in the message.
FrequencySetup setup_frequency(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec, Complex lambda,
                               std::span<const double> xi_prime);

std::string format_frequency(std::span<const double> xi_prime);

}  // namespace lopashka
