#pragma once

#include <span>
#include <vector>

#include "forestalign/vmf.hpp"

namespace forestalign {

inline constexpr int kUnmatched = -1;

/// Correspondence between source and target complexity levels.
struct GroupAssignment {
  /// sigma[k] is the target level matched to source level k, or kUnmatched.
  std::vector<int> sigma;
  double cost = 0.0;
  std::vector<int> unmatched_source;
  std::vector<int> unmatched_target;

  std::size_t matched_count() const;
};

/// Largest level count accepted on either side.
inline constexpr std::size_t kMaxLevels = 8;

/// Injective matching of min(K_s, K_t) level pairs minimizing
/// sum |SC_s(k) - SC_t(sigma(k))|, found by enumerating every candidate.
/// Equal-cost candidates are ordered by the number of rank inversions among
/// matched pairs, then lexicographically by sigma.
GroupAssignment match_groups(std::span<const double> sc_source, std::span<const double> sc_target);
GroupAssignment match_groups(const ComplexityProfile& source, const ComplexityProfile& target);

/// Rank inversions of a partial map: pairs a < b, both matched, with
/// sigma[a] > sigma[b].
int rank_inversions(std::span<const int> sigma);

}  // namespace forestalign
