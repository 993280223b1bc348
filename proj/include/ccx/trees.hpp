#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <vector>

namespace ccx {

/// An ordered tree eta: {2..n} -> {1..n-1} with eta(j) < j, stored as the
/// parent array [eta(2), ..., eta(n)] (1-based vertex labels).
struct OrderedTree {
  int n = 2;
  std::vector<int> parent;

  [[nodiscard]] int eta(int j) const { return parent[static_cast<std::size_t>(j - 2)]; }
  /// d_eta(j) = |eta^{-1}(j)| for j = 1..n, returned 0-based.
  [[nodiscard]] std::vector<int> degrees() const;
  [[nodiscard]] bool valid() const;
  friend bool operator==(const OrderedTree&, const OrderedTree&) = default;
};

/// Streams all (n-1)! ordered trees in odometer order without materializing
/// them. Throws CapabilityError unless 2 <= n <= 10.
class TreeStream {
 public:
  explicit TreeStream(int n);
  /// Returns false once the stream is exhausted.
  bool next(OrderedTree& out);

 private:
  OrderedTree current_;
  bool started_ = false;
  bool done_ = false;
};

std::uint64_t tree_count(int n);

/// Tree with the given rank in the mixed-radix order used by TreeStream.
OrderedTree tree_from_index(int n, std::uint64_t index);

/// e_l = |{j : eta(j) <= l <= j-2}| for l = 1..n-1 (returned 0-based).
std::vector<int> t_exponents(const OrderedTree& tree);

struct SpeerWeight {
  mpq_class value;
  std::vector<int> t_exponents;
};

/// prod_j d_eta(j)! * prod_l 1/(e_l + 1), exact.
SpeerWeight speer_weight(const OrderedTree& tree);

/// Sum of speer weights over all trees with n vertices, split across OpenMP
/// threads by tree rank and reduced exactly.
mpq_class lemma3_sum(int n);
/// Single-threaded reference for lemma3_sum.
mpq_class lemma3_sum_serial(int n);

/// (1/n) binom(2n-2, n-1).
mpz_class catalan_closed_form(int n);

/// Coefficients w_1..w_order of the series solving w = x + w^2, i.e. of
/// (1 - sqrt(1 - 4x))/2, computed from the recurrence.
std::vector<mpz_class> catalan_series(int order);

/// True iff catalan_series(order)[n-1] == lemma3_sum(n) for 2 <= n <= order.
bool generating_function_check(int order);

}  // namespace ccx
