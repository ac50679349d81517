#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace susc {

/// Multi-index over parameter coordinates (exponents, derivative orders, ...).
using MultiIndex = std::vector<int>;

inline int order(const MultiIndex& a) {
  return std::accumulate(a.begin(), a.end(), 0);
}

inline bool is_zero(const MultiIndex& a) {
  return std::all_of(a.begin(), a.end(), [](int v) { return v == 0; });
}

/// Axis-aligned box in R^d.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lo_, std::vector<double> hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) throw std::invalid_argument("box: lo/hi dimension mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i])) throw std::invalid_argument("box: empty interior in dim " + std::to_string(i));
  }

  static Box unit(int d) {
    return Box(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
  }

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const std::vector<double>& w, double tol = 1e-12) const {
    if (w.size() != lo.size()) return false;
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (w[i] < lo[i] - tol || w[i] > hi[i] + tol) return false;
    return true;
  }

  double diameter() const {
    double s = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(s);
  }
};

/// SplitMix64 step; used to derive per-replicate / per-chain seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic seed stream keyed by (replicate, chain).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate, std::uint64_t chain) {
  std::uint64_t s = splitmix64(master ^ (0x517cc1b727220a95ULL + replicate));
  return splitmix64(s ^ (0x2545f4914f6cdd1dULL * (chain + 1)));
}

}  // namespace susc
