#include "ccx/trees.hpp"

#include <omp.h>

#include <stdexcept>
#include <string>

#include "ccx/errors.hpp"

namespace ccx {

namespace {

void check_n(int n) {
  if (n < 2 || n > 10) throw CapabilityError("trees: n must lie in [2, 10], got " + std::to_string(n));
}

mpz_class factorial(int k) {
  mpz_class f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

std::vector<int> OrderedTree::degrees() const {
  std::vector<int> d(static_cast<std::size_t>(n), 0);
  for (int p : parent) ++d[static_cast<std::size_t>(p - 1)];
  return d;
}

bool OrderedTree::valid() const {
  if (n < 2 || static_cast<int>(parent.size()) != n - 1) return false;
  for (int j = 2; j <= n; ++j)
    if (eta(j) < 1 || eta(j) >= j) return false;
  return true;
}

TreeStream::TreeStream(int n) {
  check_n(n);
  current_.n = n;
  current_.parent.assign(static_cast<std::size_t>(n - 1), 1);
}

bool TreeStream::next(OrderedTree& out) {
  if (done_) return false;
  if (!started_) {
    started_ = true;
    out = current_;
    return true;
  }
  // Odometer: digit for vertex j runs over 1..j-1, vertex n fastest.
  for (int j = current_.n; j >= 2; --j) {
    auto& digit = current_.parent[static_cast<std::size_t>(j - 2)];
    if (digit < j - 1) {
      ++digit;
      out = current_;
      return true;
    }
    digit = 1;
  }
  done_ = true;
  return false;
}

std::uint64_t tree_count(int n) {
  check_n(n);
  std::uint64_t c = 1;
  for (int k = 2; k < n; ++k) c *= static_cast<std::uint64_t>(k);
  return c;
}

OrderedTree tree_from_index(int n, std::uint64_t index) {
  check_n(n);
  OrderedTree t;
  t.n = n;
  t.parent.assign(static_cast<std::size_t>(n - 1), 1);
  for (int j = n; j >= 2; --j) {
    const auto radix = static_cast<std::uint64_t>(j - 1);
    t.parent[static_cast<std::size_t>(j - 2)] = static_cast<int>(index % radix) + 1;
    index /= radix;
  }
  return t;
}

std::vector<int> t_exponents(const OrderedTree& tree) {
  std::vector<int> e(static_cast<std::size_t>(tree.n - 1), 0);
  for (int j = 2; j <= tree.n; ++j)
    for (int l = tree.eta(j); l <= j - 2; ++l) ++e[static_cast<std::size_t>(l - 1)];
  return e;
}

SpeerWeight speer_weight(const OrderedTree& tree) {
  SpeerWeight w;
  w.t_exponents = t_exponents(tree);
  mpz_class num = 1;
  for (int d : tree.degrees()) num *= factorial(d);
  mpz_class den = 1;
  for (int e : w.t_exponents) den *= e + 1;
  w.value = mpq_class(num, den);
  w.value.canonicalize();
  return w;
}

mpq_class lemma3_sum_serial(int n) {
  TreeStream stream(n);
  OrderedTree t;
  mpq_class sum = 0;
  while (stream.next(t)) sum += speer_weight(t).value;
  return sum;
}

mpq_class lemma3_sum(int n) {
  const std::uint64_t total = tree_count(n);
  // Fixed block partition so the reduction does not depend on scheduling;
  // exact arithmetic makes the order irrelevant anyway.
  constexpr std::int64_t kBlocks = 64;
  std::vector<mpq_class> partial(kBlocks, 0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t b = 0; b < kBlocks; ++b) {
    const std::uint64_t lo = total * static_cast<std::uint64_t>(b) / kBlocks;
    const std::uint64_t hi = total * static_cast<std::uint64_t>(b + 1) / kBlocks;
    mpq_class acc = 0;
    for (std::uint64_t i = lo; i < hi; ++i) acc += speer_weight(tree_from_index(n, i)).value;
    partial[static_cast<std::size_t>(b)] = acc;
  }
  mpq_class sum = 0;
  for (const auto& p : partial) sum += p;
  return sum;
}

mpz_class catalan_closed_form(int n) {
  if (n < 1) throw std::invalid_argument("catalan_closed_form: n must be >= 1");
  mpz_class binom;
  mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(2 * n - 2), static_cast<unsigned long>(n - 1));
  return binom / n;
}

std::vector<mpz_class> catalan_series(int order) {
  if (order < 1 || order > 10) throw CapabilityError("catalan_series: order must lie in [1, 10]");
  // w = x + w^2: coefficient of x^n is [n == 1] + sum_{i+j=n} w_i w_j.
  std::vector<mpz_class> w(static_cast<std::size_t>(order + 1), 0);
  for (int n = 1; n <= order; ++n) {
    mpz_class c = n == 1 ? 1 : 0;
    for (int i = 1; i < n; ++i) c += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(n - i)];
    w[static_cast<std::size_t>(n)] = c;
  }
  return {w.begin() + 1, w.end()};
}

bool generating_function_check(int order) {
  const auto series = catalan_series(order);
  for (int n = 2; n <= order; ++n)
    if (mpq_class(series[static_cast<std::size_t>(n - 1)]) != lemma3_sum(n)) return false;
  return true;
}

}  // namespace ccx
