#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace levygibbs::fft {

using cplx = std::complex<double>;

// In-place unnormalized transforms.
//   forward:  X_k = sum_j x_j e^{-2 pi i jk/n}
//   backward: x_j = sum_k X_k e^{+2 pi i jk/n}
// Plans are created once per size and shared; execution is thread-safe.
void forward(cplx* data, std::size_t n);
void backward(cplx* data, std::size_t n);

inline void forward(std::vector<cplx>& v) { forward(v.data(), v.size()); }
inline void backward(std::vector<cplx>& v) { backward(v.data(), v.size()); }

// Smallest n' >= n of the form 2^a 3^b 5^c.
std::size_t good_size(std::size_t n);

} // namespace levygibbs::fft
