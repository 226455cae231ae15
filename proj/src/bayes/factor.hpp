#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace vulnprio::bayes {

/// Table over boolean variables. Variables are kept in ascending index
/// order; bit k of a row index is the state of vars()[k].
class Factor {
 public:
  /// Largest factor (in variables) the eliminator may create.
  static constexpr std::size_t kMaxWidth = 26;

  Factor() : table_{1.0} {}
  Factor(std::vector<std::size_t> vars, std::vector<double> table);

  const std::vector<std::size_t>& vars() const noexcept { return vars_; }
  const std::vector<double>& table() const noexcept { return table_; }
  bool contains(std::size_t var) const noexcept;

  /// Throws Error(GraphTooLarge) past kMaxWidth.
  static Factor product(const Factor& a, const Factor& b);
  Factor sum_out(std::size_t var) const;
  Factor restrict(std::size_t var, bool value) const;

 private:
  std::vector<std::size_t> vars_;
  std::vector<double> table_;
};

}  // namespace vulnprio::bayes
