#pragma once

namespace lopashka::tol {

// Idempotency / orthogonality of boundary projections.
inline constexpr double kProjection = 1e-10;
// Invariants of the spectral split (P+ + P- = I, idempotency).
inline constexpr double kSplit = 1e-9;
// Minimal distance of companion eigenvalues to the imaginary axis.
inline constexpr double kGapMin = 1e-8;
// Largest admissible condition number of the stacked boundary matrix.
inline constexpr double kKappaMax = 1e8;
// Angular distance to the negative real axis that counts as a hit.
inline constexpr double kArg = 1e-9;
// Boundary-row reproduction in the half-space solver.
inline constexpr double kBoundary = 1e-7;
// Compatibility conditions of parabolic data.
inline constexpr double kCompat = 1e-6;
// Oracle agreement in the ODE cross-check (relative to max(1, |M|)).
inline constexpr double kOracle = 1e-8;

}  // namespace lopashka::tol
