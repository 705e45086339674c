/*
 * Copyright 2026 The fraudgan Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fraudgan/errors.hpp"
#include "fraudgan/random.hpp"

namespace fraudgan {

struct FoldSplit {
  std::size_t fold = 0;
  std::vector<std::size_t> train;  // ascending row indices
  std::vector<std::size_t> test;   // ascending row indices
};

// Stratified k-fold over binary labels. Each class is shuffled and dealt
// round-robin across folds; the negative class continues where the positive
// class stopped so fold sizes also differ by at most one.
inline std::vector<FoldSplit> stratified_kfold(std::span<const int> labels, std::size_t k,
                                               std::uint64_t seed) {
  if (k < 2) throw ParameterError("stratified_kfold: k must be >= 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  const std::size_t minority = std::min(pos.size(), neg.size());
  if (minority < k) {
    throw ParameterError("stratified_kfold: minority class has " + std::to_string(minority) +
                         " rows, fewer than k = " + std::to_string(k));
  }
  Rng rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<std::size_t> fold_of(labels.size());
  for (std::size_t i = 0; i < pos.size(); ++i) fold_of[pos[i]] = i % k;
  for (std::size_t j = 0; j < neg.size(); ++j) fold_of[neg[j]] = (pos.size() + j) % k;

  std::vector<FoldSplit> folds(k);
  for (std::size_t f = 0; f < k; ++f) folds[f].fold = f;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
  }
  return folds;
}

// Single stratified holdout split; each class contributes round(fraction * n_c)
// rows to the test side.
inline FoldSplit stratified_holdout(std::span<const int> labels, double test_fraction,
                                    std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ParameterError("holdout test fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  Rng rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  FoldSplit split;
  for (const auto* group : {&pos, &neg}) {
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(group->size())));
    for (std::size_t i = 0; i < group->size(); ++i)
      (i < n_test ? split.test : split.train).push_back((*group)[i]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  if (std::none_of(split.train.begin(), split.train.end(), [&](std::size_t i) { return labels[i] == 1; }) ||
      std::none_of(split.test.begin(), split.test.end(), [&](std::size_t i) { return labels[i] == 1; })) {
    throw ParameterError("holdout split leaves one side without positives");
  }
  return split;
}

}  // namespace fraudgan
