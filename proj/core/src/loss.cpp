#include "agmm/loss.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "agmm/error.hpp"

namespace agmm {

LabelVector PermutationMap::apply(const LabelVector& z) const {
  LabelVector out = z;
  for (int& v : out.values) v = mapping.at(static_cast<std::size_t>(v));
  return out;
}

namespace {

void check_pair(const LabelVector& z, const LabelVector& zstar, std::size_t k) {
  if (z.size() != zstar.size())
    fail(ErrorKind::LengthMismatch, "label vectors have lengths " + std::to_string(z.size()) +
                                        " and " + std::to_string(zstar.size()));
  check_labels(z, k);
  check_labels(zstar, k);
}

struct Assignment {
  std::vector<int> row_to_col;
  std::vector<long long> u;  // row potentials
  std::vector<long long> v;  // column potentials
};

// Min-cost perfect assignment on an integer square cost matrix (shortest
// augmenting path with potentials). On return u_i + v_j <= cost_ij everywhere,
// with equality on matched pairs.
Assignment min_cost_assignment(const std::vector<std::vector<long long>>& cost) {
  const std::size_t n = cost.size();
  constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<long long> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      long long delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out{std::vector<int>(n, -1), std::vector<long long>(n), std::vector<long long>(n)};
  for (std::size_t j = 1; j <= n; ++j) out.row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  for (std::size_t i = 0; i < n; ++i) {
    out.u[i] = u[i + 1];
    out.v[i] = v[i + 1];
  }
  return out;
}

}  // namespace

std::vector<std::vector<long long>> confusion_matrix(const LabelVector& z, const LabelVector& zstar,
                                                     std::size_t k) {
  check_pair(z, zstar, k);
  std::vector<std::vector<long long>> c(k, std::vector<long long>(k, 0));
  for (std::size_t j = 0; j < z.size(); ++j)
    ++c[static_cast<std::size_t>(z[j])][static_cast<std::size_t>(zstar[j])];
  return c;
}

PermutationMap max_weight_bijection(const std::vector<std::vector<long long>>& weight) {
  const std::size_t k = weight.size();
  long long top = 0;
  for (const auto& row : weight) {
    if (row.size() != k) fail(ErrorKind::InvalidArgument, "weight table must be square");
    for (long long w : row) top = std::max(top, w);
  }
  std::vector<std::vector<long long>> cost(k, std::vector<long long>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) cost[i][j] = top - weight[i][j];

  Assignment a = min_cost_assignment(cost);
  auto tight = [&](std::size_t i, std::size_t j) { return cost[i][j] - a.u[i] - a.v[j] == 0; };

  // Every optimal bijection uses only tight edges, so the lexicographically
  // smallest optimum is found greedily: give row i the smallest column that
  // still extends to a perfect matching on tight edges, re-routing the
  // current matching along an alternating cycle when needed.
  std::vector<int>& match = a.row_to_col;
  std::vector<int> col_owner(k);
  for (std::size_t i = 0; i < k; ++i) col_owner[static_cast<std::size_t>(match[i])] = static_cast<int>(i);
  std::vector<char> fixed_col(k, 0);

  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (fixed_col[j] || !tight(i, j)) continue;
      if (match[i] == static_cast<int>(j)) break;

      // Search an alternating path from the owner of j to i's current column.
      // Every row on the path moves to the column currently matched to its
      // successor; the last row takes i's column and i takes j.
      const auto target = static_cast<std::size_t>(match[i]);
      const auto start = static_cast<std::size_t>(col_owner[j]);
      std::vector<int> parent(k, -1);
      std::vector<char> seen_row(k, 0);
      std::deque<std::size_t> queue{start};
      seen_row[start] = 1;
      seen_row[i] = 1;
      int end_row = -1;
      while (!queue.empty() && end_row < 0) {
        const std::size_t r = queue.front();
        queue.pop_front();
        for (std::size_t c = 0; c < k; ++c) {
          if (fixed_col[c] || c == j || static_cast<int>(c) == match[r] || !tight(r, c)) continue;
          if (c == target) {
            end_row = static_cast<int>(r);
            break;
          }
          const auto next = static_cast<std::size_t>(col_owner[c]);
          if (seen_row[next]) continue;
          seen_row[next] = 1;
          parent[next] = static_cast<int>(r);
          queue.push_back(next);
        }
      }
      if (end_row < 0) continue;

      std::size_t row = static_cast<std::size_t>(end_row);
      std::size_t take = target;
      while (true) {
        const auto given_up = static_cast<std::size_t>(match[row]);
        match[row] = static_cast<int>(take);
        if (row == start) break;
        take = given_up;
        row = static_cast<std::size_t>(parent[row]);
      }
      match[i] = static_cast<int>(j);
      for (std::size_t row = 0; row < k; ++row)
        col_owner[static_cast<std::size_t>(match[row])] = static_cast<int>(row);
      break;
    }
    fixed_col[static_cast<std::size_t>(match[i])] = 1;
  }
  return PermutationMap{match};
}

PermutationMap best_bijection(const LabelVector& z, const LabelVector& zstar, std::size_t k) {
  return max_weight_bijection(confusion_matrix(z, zstar, k));
}

MisclusteringResult misclustering_rate(const LabelVector& z, const LabelVector& zstar, std::size_t k) {
  const auto confusion = confusion_matrix(z, zstar, k);
  MisclusteringResult out;
  out.best = max_weight_bijection(confusion);
  long long agree = 0;
  for (std::size_t a = 0; a < k; ++a) agree += confusion[a][static_cast<std::size_t>(out.best.mapping[a])];
  out.mismatches = z.size() - static_cast<std::size_t>(agree);
  out.rate = z.size() == 0 ? 0.0 : static_cast<double>(out.mismatches) / static_cast<double>(z.size());
  return out;
}

double center_loss(const LabelVector& z, const LabelVector& zstar, const GmmParams& params) {
  check_pair(z, zstar, params.k);
  double total = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j] == zstar[j]) continue;
    const Vector gap = subtract(params.centers.row(static_cast<std::size_t>(z[j])),
                                params.centers.row(static_cast<std::size_t>(zstar[j])));
    total += dot(gap, gap);
  }
  return total;
}

}  // namespace agmm
