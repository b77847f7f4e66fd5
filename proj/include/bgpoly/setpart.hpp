#pragma once

// Set partitions of {0..k-1} and the moment-to-cumulant sum
//   kappa(X_1..X_k) = sum_pi (|pi|-1)! (-1)^{|pi|-1} prod_{B in pi} E[prod_{i in B} X_i].

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "bgpoly/errors.hpp"

namespace bgpoly {

inline constexpr int kMaxPartitionOrder = 8;

struct SetPartition {
  std::vector<std::vector<int>> blocks;
  /// Each block as a bitmask over {0..k-1}.
  std::vector<std::uint32_t> masks() const {
    std::vector<std::uint32_t> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) {
      std::uint32_t m = 0;
      for (int i : b) m |= 1u << i;
      out.push_back(m);
    }
    return out;
  }
};

/// All partitions of {0..k-1}, each once (restricted growth strings). k = 0 gives the
/// single empty partition.
inline std::vector<SetPartition> enumerate_partitions(int k) {
  if (k < 0) throw RangeError("enumerate_partitions: k must be >= 0");
  if (k > kMaxPartitionOrder)
    throw CapabilityError("enumerate_partitions: k=" + std::to_string(k) + " exceeds " +
                          std::to_string(kMaxPartitionOrder));
  std::vector<SetPartition> out;
  std::vector<int> a(k, 0);
  auto emit = [&] {
    SetPartition p;
    for (int i = 0; i < k; ++i) {
      if (a[i] >= static_cast<int>(p.blocks.size())) p.blocks.resize(a[i] + 1);
      p.blocks[a[i]].push_back(i);
    }
    out.push_back(std::move(p));
  };
  if (k == 0) {
    out.push_back({});
    return out;
  }
  // a[i] <= 1 + max(a[0..i-1])
  auto rec = [&](auto&& self, int i, int mx) -> void {
    if (i == k) {
      emit();
      return;
    }
    for (int v = 0; v <= mx + 1; ++v) {
      a[i] = v;
      self(self, i + 1, std::max(mx, v));
    }
  };
  a[0] = 0;
  rec(rec, 1, 0);
  return out;
}

namespace detail {

/// Partitions as block masks plus (|pi|-1)!(-1)^{|pi|-1}, cached per k.
struct PartitionWeights {
  std::vector<std::vector<std::uint32_t>> masks;
  std::vector<double> weight;
};

inline const PartitionWeights& partition_weights(int k) {
  static std::once_flag once[kMaxPartitionOrder + 1];
  static PartitionWeights table[kMaxPartitionOrder + 1];
  if (k < 0 || k > kMaxPartitionOrder)
    throw CapabilityError("joint cumulant: order " + std::to_string(k) + " not supported");
  std::call_once(once[k], [k] {
    for (const auto& p : enumerate_partitions(k)) {
      const int b = static_cast<int>(p.blocks.size());
      double w = 1.0;
      for (int i = 2; i < b; ++i) w *= i;
      if ((b - 1) % 2 == 1) w = -w;
      table[k].masks.push_back(p.masks());
      table[k].weight.push_back(w);
    }
  });
  return table[k];
}

}  // namespace detail

/// Joint cumulant of k variables from mixed moments moment(mask) = E[prod_{i in mask} X_i].
/// If `centered`, partitions with a singleton block are skipped (their moment is 0).
template <class Moment>
double cumulant_from_moments(int k, Moment&& moment, bool centered = false) {
  const auto& pw = detail::partition_weights(k);
  double total = 0.0;
  for (std::size_t p = 0; p < pw.masks.size(); ++p) {
    double prod = pw.weight[p];
    bool skip = false;
    for (std::uint32_t m : pw.masks[p]) {
      if (centered && (m & (m - 1)) == 0) {
        skip = true;
        break;
      }
      prod *= moment(m);
    }
    if (!skip) total += prod;
  }
  return total;
}

}  // namespace bgpoly
