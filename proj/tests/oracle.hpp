#pragma once

// Test-only reference code. Nothing here calls into the fusion or alignment
// modules; it works on raw arrays so it can check them independently.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "coff/grid.hpp"

namespace coff::oracle {

struct Dense {
  std::size_t c = 0, h = 0, w = 0;
  std::vector<double> v;  // c-major, then row-major
  double& at(std::size_t ch, std::size_t r, std::size_t col) { return v[(ch * h + r) * w + col]; }
  double at(std::size_t ch, std::size_t r, std::size_t col) const { return v[(ch * h + r) * w + col]; }
};

struct Eq1Result {
  bool overlap = false;
  double s = 0.0;
  double x = 0.0;
  Dense fused;
};

// Straight-line evaluation of the composed fusion for a sender whose grid is
// shifted by (dr, dc) whole cells against the receiver grid: receiver cell
// (r, c) sees sender cell (r - dr, c - dc).
inline Eq1Result reference_fusion(const Dense& rx, const Dense& tx, long dr, long dc, double y,
                                  double s_low = 0.15, double s_high = 0.3, double c_low = 1.2,
                                  double c_mid = 1.5, double x_cap = 1.8) {
  Eq1Result out;
  out.fused = rx;
  const long H = static_cast<long>(rx.h);
  const long W = static_cast<long>(rx.w);
  long r0 = H, r1 = -1, c0 = W, c1 = -1, count = 0;
  double sum = 0.0;
  for (long r = 0; r < H; ++r) {
    for (long c = 0; c < W; ++c) {
      const long sr = r - dr, sc = c - dc;
      if (sr < 0 || sc < 0 || sr >= H || sc >= W) continue;
      ++count;
      r0 = std::min(r0, r); r1 = std::max(r1, r);
      c0 = std::min(c0, c); c1 = std::max(c1, c);
      for (std::size_t ch = 0; ch < rx.c; ++ch) {
        const double d = rx.at(ch, r, c) - tx.at(ch, sr, sc);
        sum += d * d;
      }
    }
  }
  if (count > 0) {
    out.overlap = true;
    const double wh = static_cast<double>((r1 - r0 + 1) * (c1 - c0 + 1));
    out.s = std::sqrt(sum) / wh;
    const double ratio = static_cast<double>(count) / static_cast<double>(H * W);
    if (out.s < s_low) out.x = out.s / ratio + c_low;
    else if (out.s < s_high) out.x = out.s / ratio + c_mid;
    else out.x = x_cap;
    for (long r = 0; r < H; ++r) {
      for (long c = 0; c < W; ++c) {
        const long sr = r - dr, sc = c - dc;
        if (sr < 0 || sc < 0 || sr >= H || sc >= W) continue;
        for (std::size_t ch = 0; ch < rx.c; ++ch) {
          out.fused.at(ch, r, c) = std::max(rx.at(ch, r, c), tx.at(ch, sr, sc) * out.x);
        }
      }
    }
  }
  for (double& v : out.fused.v) v *= y;
  return out;
}

inline Dense to_dense(const FeatureMap& m) {
  Dense d{m.channels(), m.height(), m.width(), {}};
  for (float v : m.values()) d.v.push_back(v);
  return d;
}

// Sparse nonnegative values: roughly `density` of cells nonzero, some of them
// exactly zero in every channel.
inline std::vector<float> random_values(std::mt19937_64& rng, std::size_t n, double density = 0.5) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<float> v(n);
  for (float& x : v) x = u(rng) < density ? static_cast<float>(u(rng)) : 0.0F;
  return v;
}

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-12});
}

}  // namespace coff::oracle
