#pragma once

// Mann-Whitney U test, two-sided. Exact permutation enumeration when the
// pooled size is at most 20 (the usual 10-vs-10 campaign fits), normal
// approximation with tie correction and continuity correction beyond.
// Midranks are kept as doubled integers so tied data stays exact.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace waypoint::fuzzer {

struct MwuResult {
  double u = 0;         // U statistic of the first sample
  double p = 1.0;       // two-sided
  bool exact = false;   // enumeration vs normal approximation
};

inline MwuResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
  size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;

  // Doubled midranks over the pooled sample.
  std::vector<std::pair<double, int>> pooled;  // value, origin (0 = a)
  pooled.reserve(n);
  for (double v : a) pooled.push_back({v, 0});
  for (double v : b) pooled.push_back({v, 1});
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<int64_t> rank2(n);  // 2 * midrank
  std::vector<size_t> tie_sizes;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    // ranks i+1 .. j (1-based) share midrank (i+1+j)/2
    for (size_t k = i; k < j; ++k) rank2[k] = static_cast<int64_t>(i + 1 + j);
    tie_sizes.push_back(j - i);
    i = j;
  }

  int64_t r1_2 = 0;
  for (size_t i = 0; i < n; ++i)
    if (pooled[i].second == 0) r1_2 += rank2[i];
  // U1 = R1 - n1(n1+1)/2, everything doubled to stay integral under ties.
  int64_t u1_2 = r1_2 - static_cast<int64_t>(n1 * (n1 + 1));
  int64_t mean2 = static_cast<int64_t>(n1 * n2);  // 2 * E[U1]

  MwuResult res;
  res.u = static_cast<double>(u1_2) / 2.0;

  if (n <= 20 && n1 >= 1 && n2 >= 1) {
    // Exact: every way of labeling n1 of the pooled ranks as group a.
    res.exact = true;
    int64_t obs_dev = std::llabs(u1_2 - mean2);
    int64_t hits = 0, total = 0;
    std::vector<size_t> idx(n1);
    for (size_t i = 0; i < n1; ++i) idx[i] = i;
    while (true) {
      int64_t r2 = 0;
      for (size_t i : idx) r2 += rank2[i];
      int64_t dev = std::llabs(r2 - static_cast<int64_t>(n1 * (n1 + 1)) - mean2);
      if (dev >= obs_dev) ++hits;
      ++total;
      // next combination
      size_t k = n1;
      while (k > 0 && idx[k - 1] == n - n1 + k - 1) --k;
      if (k == 0) break;
      ++idx[k - 1];
      for (size_t i = k; i < n1; ++i) idx[i] = idx[i - 1] + 1;
    }
    res.p = static_cast<double>(hits) / static_cast<double>(total);
    return res;
  }

  // Normal approximation with tie correction.
  double nn = static_cast<double>(n);
  double tie_term = 0;
  for (size_t t : tie_sizes) {
    double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  double var = (static_cast<double>(n1) * static_cast<double>(n2) / 12.0) *
               ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  if (var <= 0) {
    res.p = 1.0;  // all pooled values identical
    return res;
  }
  double diff = (static_cast<double>(u1_2) - static_cast<double>(mean2)) / 2.0;
  double cc = std::min(0.5, std::abs(diff));  // continuity, toward the mean
  double z = (std::abs(diff) - cc) / std::sqrt(var);
  res.p = std::erfc(z / std::sqrt(2.0));
  if (res.p > 1.0) res.p = 1.0;
  return res;
}

}  // namespace waypoint::fuzzer
