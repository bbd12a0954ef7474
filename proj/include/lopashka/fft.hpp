#pragma once

#include <vector>

#include "lopashka/types.hpp"

namespace lopashka {

// In-place multidimensional DFT over the leading axes `dims` of an array laid
// out as [flat index over dims][inner], with `inner` contiguous entries per
// position.  Forward uses e^{-i x xi}; the inverse is normalized by 1/prod(dims).
void fft_many(std::vector<Complex>& data, const std::vector<int>& dims, std::size_t inner, bool inverse);

}  // namespace lopashka
