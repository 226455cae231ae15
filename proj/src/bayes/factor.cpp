#include "bayes/factor.hpp"

#include <algorithm>
#include <iterator>
#include <string>

#include "common/error.hpp"

namespace vulnprio::bayes {

Factor::Factor(std::vector<std::size_t> vars, std::vector<double> table)
    : vars_(std::move(vars)), table_(std::move(table)) {
  if (!std::is_sorted(vars_.begin(), vars_.end()) ||
      table_.size() != (std::size_t{1} << vars_.size())) {
    throw Error(ErrorCode::InvalidArgument, "factor: unsorted scope or table size mismatch");
  }
}

bool Factor::contains(std::size_t var) const noexcept {
  return std::binary_search(vars_.begin(), vars_.end(), var);
}

Factor Factor::product(const Factor& a, const Factor& b) {
  std::vector<std::size_t> scope;
  std::set_union(a.vars_.begin(), a.vars_.end(), b.vars_.begin(), b.vars_.end(),
                 std::back_inserter(scope));
  if (scope.size() > kMaxWidth) {
    throw Error(ErrorCode::GraphTooLarge,
                "elimination produced a factor over " + std::to_string(scope.size()) +
                    " variables (limit " + std::to_string(kMaxWidth) + ")");
  }
  // Per scope bit, the matching bit in a and in b (0 when absent).
  std::vector<std::uint64_t> bit_a(scope.size(), 0), bit_b(scope.size(), 0);
  for (std::size_t k = 0, ia = 0, ib = 0; k < scope.size(); ++k) {
    if (ia < a.vars_.size() && a.vars_[ia] == scope[k]) bit_a[k] = std::uint64_t{1} << ia++;
    if (ib < b.vars_.size() && b.vars_[ib] == scope[k]) bit_b[k] = std::uint64_t{1} << ib++;
  }
  std::vector<double> table(std::size_t{1} << scope.size());
  for (std::uint64_t row = 0; row < table.size(); ++row) {
    std::uint64_t ra = 0, rb = 0;
    for (std::size_t k = 0; k < scope.size(); ++k) {
      if (row >> k & 1U) {
        ra |= bit_a[k];
        rb |= bit_b[k];
      }
    }
    table[row] = a.table_[ra] * b.table_[rb];
  }
  return Factor(std::move(scope), std::move(table));
}

namespace {

// Row index with a zero bit inserted at position k.
std::uint64_t spread(std::uint64_t row, std::size_t k) {
  const std::uint64_t low = row & ((std::uint64_t{1} << k) - 1);
  return ((row >> k) << (k + 1)) | low;
}

}  // namespace

Factor Factor::sum_out(std::size_t var) const {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), var);
  if (it == vars_.end() || *it != var) return *this;
  const std::size_t k = static_cast<std::size_t>(it - vars_.begin());
  std::vector<std::size_t> scope(vars_);
  scope.erase(scope.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<double> table(std::size_t{1} << scope.size());
  for (std::uint64_t row = 0; row < table.size(); ++row) {
    const std::uint64_t base = spread(row, k);
    table[row] = table_[base] + table_[base | (std::uint64_t{1} << k)];
  }
  return Factor(std::move(scope), std::move(table));
}

Factor Factor::restrict(std::size_t var, bool value) const {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), var);
  if (it == vars_.end() || *it != var) return *this;
  const std::size_t k = static_cast<std::size_t>(it - vars_.begin());
  std::vector<std::size_t> scope(vars_);
  scope.erase(scope.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<double> table(std::size_t{1} << scope.size());
  const std::uint64_t bit = value ? std::uint64_t{1} << k : 0;
  for (std::uint64_t row = 0; row < table.size(); ++row) {
    table[row] = table_[spread(row, k) | bit];
  }
  return Factor(std::move(scope), std::move(table));
}

}  // namespace vulnprio::bayes
