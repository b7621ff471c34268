#include "varcomp/symbol.hpp"

#include <algorithm>
#include <map>

namespace varcomp {

MultiIndex::MultiIndex(std::vector<int> indices) : idx_(std::move(indices)) {
  std::sort(idx_.begin(), idx_.end());
}

MultiIndex MultiIndex::with(int i) const {
  MultiIndex out;
  out.idx_ = idx_;
  out.idx_.insert(std::upper_bound(out.idx_.begin(), out.idx_.end(), i), i);
  return out;
}

MultiIndex MultiIndex::merged(const MultiIndex& other) const {
  MultiIndex out;
  out.idx_.reserve(idx_.size() + other.idx_.size());
  std::merge(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(), std::back_inserter(out.idx_));
  return out;
}

int MultiIndex::count(int i) const noexcept {
  return static_cast<int>(std::count(idx_.begin(), idx_.end(), i));
}

std::uint64_t MultiIndex::orderings() const {
  std::uint64_t result = 1;
  std::uint64_t placed = 0;
  // multinomial |J|! / prod(mult!) built incrementally as a product of binomials
  for (std::size_t k = 0; k < idx_.size();) {
    std::size_t run = 1;
    while (k + run < idx_.size() && idx_[k + run] == idx_[k]) ++run;
    for (std::size_t r = 1; r <= run; ++r) {
      ++placed;
      result = result * placed / r;
    }
    k += run;
  }
  return result;
}

namespace {

void extend(int base_dim, int remaining, int start, std::vector<int>& cur, std::vector<MultiIndex>& out) {
  if (remaining == 0) {
    out.emplace_back(cur);
    return;
  }
  for (int i = start; i < base_dim; ++i) {
    cur.push_back(i);
    extend(base_dim, remaining - 1, i, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<MultiIndex> multi_indices_of_order(int base_dim, int order) {
  std::vector<MultiIndex> out;
  std::vector<int> cur;
  extend(base_dim, order, 0, cur, out);
  return out;
}

std::vector<MultiIndex> multi_indices_up_to(int base_dim, int max_order) {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= max_order; ++k) {
    auto level = multi_indices_of_order(base_dim, k);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

}  // namespace varcomp
