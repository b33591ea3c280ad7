#include "warpfield/fft.hpp"

#include <cmath>
#include <utility>

namespace warpfield::fft {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void transform(std::vector<Complex>& a, int sign) {
  const size_t n = a.size();
  require(n > 0 && is_pow2(int(n)), "fft: length must be a power of two");
  require(sign == 1 || sign == -1, "fft: sign must be +1 or -1");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = double(sign) * 2.0 * PI / double(len);
    const Complex wlen = std::polar(1.0, ang);
    for (size_t i = 0; i < n; i += len) {
      Complex w{1.0, 0.0};
      for (size_t j = 0; j < len / 2; ++j) {
        Complex u = a[i + j];
        Complex v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

void transform_nd(std::vector<Complex>& a, const std::vector<int>& extents, int sign) {
  require(!extents.empty(), "fft: empty extent list");
  size_t total = 1;
  for (int e : extents) {
    require(is_pow2(e), "fft: every extent must be a power of two");
    total *= size_t(e);
  }
  require(a.size() == total, "fft: array size does not match extents");

  const int dim = int(extents.size());
  std::vector<size_t> stride(dim, 1);
  for (int d = dim - 2; d >= 0; --d) stride[d] = stride[d + 1] * size_t(extents[d + 1]);

  std::vector<Complex> line;
  for (int d = 0; d < dim; ++d) {
    const size_t n = size_t(extents[d]);
    const size_t s = stride[d];
    line.resize(n);
    const size_t lines = total / n;
    for (size_t l = 0; l < lines; ++l) {
      const size_t inner = l % s;
      const size_t outer = l / s;
      const size_t base = outer * s * n + inner;
      for (size_t j = 0; j < n; ++j) line[j] = a[base + j * s];
      transform(line, sign);
      for (size_t j = 0; j < n; ++j) a[base + j * s] = line[j];
    }
  }
}

}  // namespace warpfield::fft
