#pragma once
// Small shared utilities: degree-7 smoothstep, FNV hashing, parallel map.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace speclab {

// Degree-7 smoothstep: s(0)=0, s(1)=1, s'=s''=s'''=0 at both ends.
// All radial cutoffs and cap blends in the project use this kernel.
struct Smoothstep7 {
  static double value(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return ((( -20.0 * u + 70.0) * u - 84.0) * u + 35.0) * u * u * u * u;
  }
  static double d1(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return (((-140.0 * u + 420.0) * u - 420.0) * u + 140.0) * u * u * u;
  }
  static double d2(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return (((-840.0 * u + 2100.0) * u - 1680.0) * u + 420.0) * u * u;
  }
};

// Ramp from 1 on (-inf,a] down to 0 on [b,inf); derivatives included.
struct SmoothCutoff {
  double a = 0.0, b = 1.0;  // 1 for r<=a, 0 for r>=b
  double value(double r) const { return 1.0 - Smoothstep7::value((r - a) / (b - a)); }
  double d1(double r) const {
    double w = b - a;
    return -Smoothstep7::d1((r - a) / w) / w;
  }
  double d2(double r) const {
    double w = b - a;
    return -Smoothstep7::d2((r - a) / w) / (w * w);
  }
};

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// Deterministic indexed parallel map: each job writes only to its own slot,
// so results are independent of scheduling.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned workers = 0) {
  if (workers == 0) workers = std::thread::hardware_concurrency();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  unsigned k = std::min<std::size_t>(workers, n);
  pool.reserve(k);
  for (unsigned i = 0; i < k; ++i) pool.emplace_back(body);
  for (auto& t : pool) t.join();
}

}  // namespace speclab
