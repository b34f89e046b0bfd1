#pragma once

// Misclustering losses and optimal label alignment.

#include <cstddef>
#include <vector>

#include "agmm/model.hpp"

namespace agmm {

// A bijection on {0..k-1}: mapping[a] is the truth label matched to estimate label a.
struct PermutationMap {
  std::vector<int> mapping;

  LabelVector apply(const LabelVector& z) const;
  friend bool operator==(const PermutationMap&, const PermutationMap&) = default;
};

struct MisclusteringResult {
  double rate = 0.0;
  std::size_t mismatches = 0;
  PermutationMap best;
};

// confusion[a][b] = #{j : z_j = a, zstar_j = b}.
std::vector<std::vector<long long>> confusion_matrix(const LabelVector& z, const LabelVector& zstar,
                                                     std::size_t k);

// Maximum-agreement bijection (Hungarian algorithm on the confusion matrix).
// Among optimal bijections the lexicographically smallest mapping is returned.
PermutationMap best_bijection(const LabelVector& z, const LabelVector& zstar, std::size_t k);

// Same, starting from a precomputed k x k weight table.
PermutationMap max_weight_bijection(const std::vector<std::vector<long long>>& weight);

// h(z, z*) = min over bijections psi of (1/n) #{j : psi(z_j) != z*_j}.
MisclusteringResult misclustering_rate(const LabelVector& z, const LabelVector& zstar, std::size_t k);

// l(z, z*) = sum_j ||theta_{z_j} - theta_{z*_j}||^2, evaluated on the labels as given.
double center_loss(const LabelVector& z, const LabelVector& zstar, const GmmParams& params);

}  // namespace agmm
