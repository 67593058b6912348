// Copyright 2026 The gbc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

namespace gbc {

using Permutation = std::vector<int>;  // 0-based images (p[0], ..., p[n-1])

inline int permutation_sign(const Permutation& p) {
  int inversions = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) ++inversions;
  return (inversions % 2 == 0) ? 1 : -1;
}

inline std::vector<Permutation> all_permutations(int n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<Permutation> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Permutations with increasing consecutive pairs: p[0]<p[1], p[2]<p[3], ...
// (r!/2^h of them, r = 2h).  These index the terms of the pair-expanded
// Pfaffian sum.
inline std::vector<Permutation> pair_increasing_permutations(int r) {
  std::vector<Permutation> out;
  for (auto& p : all_permutations(r)) {
    bool ok = true;
    for (int j = 0; j + 1 < r; j += 2)
      if (p[j] > p[j + 1]) ok = false;
    if (ok) out.push_back(p);
  }
  return out;
}

// Perfect matchings of {0,...,r-1} written as permutations with
// p[0]<p[1], p[2]<p[3], ... and p[0]<p[2]<p[4]<...  ((r-1)!! of them).
inline std::vector<Permutation> perfect_matchings(int r) {
  std::vector<Permutation> out;
  Permutation current;
  std::vector<bool> used(r, false);
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(current.size()) == r) {
      out.push_back(current);
      return;
    }
    int first = 0;
    while (used[first]) ++first;
    used[first] = true;
    current.push_back(first);
    for (int second = first + 1; second < r; ++second) {
      if (used[second]) continue;
      used[second] = true;
      current.push_back(second);
      self(self);
      current.pop_back();
      used[second] = false;
    }
    current.pop_back();
    used[first] = false;
  };
  rec(rec);
  return out;
}

inline double double_factorial_odd(int h) {  // (2h-1)!!
  double v = 1.0;
  for (int j = 1; j <= h; ++j) v *= static_cast<double>(2 * j - 1);
  return v;
}

inline double factorial(int n) {
  double v = 1.0;
  for (int j = 2; j <= n; ++j) v *= static_cast<double>(j);
  return v;
}

}  // namespace gbc
