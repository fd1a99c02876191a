#include "forestalign/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "forestalign/error.hpp"

namespace forestalign {

std::size_t GroupAssignment::matched_count() const {
  return static_cast<std::size_t>(
      std::count_if(sigma.begin(), sigma.end(), [](int s) { return s != kUnmatched; }));
}

int rank_inversions(std::span<const int> sigma) {
  int inversions = 0;
  for (std::size_t a = 0; a < sigma.size(); ++a) {
    if (sigma[a] == kUnmatched) continue;
    for (std::size_t b = a + 1; b < sigma.size(); ++b) {
      if (sigma[b] != kUnmatched && sigma[a] > sigma[b]) ++inversions;
    }
  }
  return inversions;
}

namespace {

struct Candidate {
  std::vector<int> sigma;
  double cost = std::numeric_limits<double>::infinity();
  int inversions = std::numeric_limits<int>::max();
};

// Unmatched sorts after every target level in the lexicographic tie-break.
bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  auto key = [](int s) { return s == kUnmatched ? std::numeric_limits<int>::max() : s; };
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (key(a[i]) != key(b[i])) return key(a[i]) < key(b[i]);
  }
  return false;
}

bool better(const Candidate& a, const Candidate& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.inversions != b.inversions) return a.inversions < b.inversions;
  return lex_less(a.sigma, b.sigma);
}

double assignment_cost(std::span<const double> s, std::span<const double> t,
                       const std::vector<int>& sigma) {
  double cost = 0.0;
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    if (sigma[k] != kUnmatched) cost += std::abs(s[k] - t[static_cast<std::size_t>(sigma[k])]);
  }
  return cost;
}

class Enumerator {
 public:
  Enumerator(std::span<const double> s, std::span<const double> t)
      : s_(s), t_(t), needed_(std::min(s.size(), t.size())),
        sigma_(s.size(), kUnmatched), used_(t.size(), false) {}

  Candidate run() {
    visit(0, 0);
    return best_;
  }

 private:
  void visit(std::size_t level, std::size_t matched) {
    const std::size_t remaining = s_.size() - level;
    if (matched + remaining < needed_) return;
    if (level == s_.size()) {
      Candidate c{sigma_, assignment_cost(s_, t_, sigma_), rank_inversions(sigma_)};
      if (better(c, best_)) best_ = std::move(c);
      return;
    }
    if (matched < needed_) {
      for (std::size_t j = 0; j < t_.size(); ++j) {
        if (used_[j]) continue;
        used_[j] = true;
        sigma_[level] = static_cast<int>(j);
        visit(level + 1, matched + 1);
        sigma_[level] = kUnmatched;
        used_[j] = false;
      }
    }
    visit(level + 1, matched);
  }

  std::span<const double> s_;
  std::span<const double> t_;
  std::size_t needed_;
  std::vector<int> sigma_;
  std::vector<bool> used_;
  Candidate best_;
};

}  // namespace

GroupAssignment match_groups(std::span<const double> sc_source,
                             std::span<const double> sc_target) {
  if (sc_source.empty() || sc_target.empty()) {
    throw_invalid("match_groups needs at least one level on each side");
  }
  if (sc_source.size() > kMaxLevels || sc_target.size() > kMaxLevels) {
    throw_invalid("match_groups supports at most " + std::to_string(kMaxLevels) + " levels");
  }
  for (double v : sc_source) {
    if (!std::isfinite(v)) throw_invalid("non-finite source complexity");
  }
  for (double v : sc_target) {
    if (!std::isfinite(v)) throw_invalid("non-finite target complexity");
  }

  Candidate best = Enumerator(sc_source, sc_target).run();
  GroupAssignment out;
  out.sigma = std::move(best.sigma);
  out.cost = best.cost;
  std::vector<bool> hit(sc_target.size(), false);
  for (std::size_t k = 0; k < out.sigma.size(); ++k) {
    if (out.sigma[k] == kUnmatched) {
      out.unmatched_source.push_back(static_cast<int>(k));
    } else {
      hit[static_cast<std::size_t>(out.sigma[k])] = true;
    }
  }
  for (std::size_t j = 0; j < hit.size(); ++j) {
    if (!hit[j]) out.unmatched_target.push_back(static_cast<int>(j));
  }
  return out;
}

GroupAssignment match_groups(const ComplexityProfile& source, const ComplexityProfile& target) {
  return match_groups(std::span<const double>(source.sc), std::span<const double>(target.sc));
}

}  // namespace forestalign
