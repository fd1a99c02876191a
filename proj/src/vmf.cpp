#include "forestalign/vmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "forestalign/error.hpp"
#include "forestalign/kernels.hpp"

namespace forestalign {

namespace {

constexpr double kLog4Pi = 2.5310242469692907;  // log(4 pi)

// Seeds for successive attempts; splitmix64 keeps nearby seeds unrelated.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t attempt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (attempt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

kernels::VmfTerms make_terms(const std::vector<VmfComponent>& comps) {
  kernels::VmfTerms terms;
  terms.log_offset.reserve(comps.size());
  terms.kappa_mu.reserve(comps.size());
  for (const auto& c : comps) {
    const double log_w = c.weight > 0.0 ? std::log(c.weight)
                                        : -std::numeric_limits<double>::infinity();
    terms.log_offset.push_back(log_w + vmf_log_normalizer(c.kappa));
    terms.kappa_mu.push_back(c.kappa * c.mu);
  }
  return terms;
}

kernels::VmfStats estep(std::span<const Vec3> dirs, const std::vector<VmfComponent>& comps,
                        const VmfFitOptions& options, std::vector<double>* resp = nullptr) {
  const auto terms = make_terms(comps);
  return options.parallel ? kernels::vmf_estep_parallel(dirs, terms, resp)
                          : kernels::vmf_estep_serial(dirs, terms, resp);
}

// Closed-form M-step. Components that received no mass keep their direction
// and concentration. The approximate concentration replaces the previous one
// only when it does not lower the component's expected complete-data term,
// unless `fresh`.
void mstep(const kernels::VmfStats& stats, std::size_t n, std::vector<VmfComponent>& comps,
           bool fresh = false) {
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const double mass = stats.mass[k];
    comps[k].weight = mass / static_cast<double>(n);
    const double len = stats.resultant[k].norm();
    if (mass <= 0.0 || len <= 0.0) continue;
    comps[k].mu = stats.resultant[k] / len;
    const double proposed = estimate_kappa(len / mass);
    auto q = [&](double kappa) { return mass * vmf_log_normalizer(kappa) + kappa * len; };
    if (fresh || q(proposed) >= q(comps[k].kappa)) comps[k].kappa = proposed;
  }
}

std::vector<int> argmax_labels(const std::vector<double>& resp, std::size_t k_count) {
  const std::size_t n = k_count == 0 ? 0 : resp.size() / k_count;
  std::vector<int> labels(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = resp.data() + i * k_count;
    labels[i] = static_cast<int>(std::max_element(row, row + k_count) - row);
  }
  return labels;
}

// Hard assignment to the nearest seed direction followed by one M-step.
std::vector<VmfComponent> initial_components(std::span<const Vec3> dirs,
                                             const std::vector<std::size_t>& seeds) {
  const std::size_t k_count = seeds.size();
  kernels::VmfStats stats;
  stats.mass.assign(k_count, 0.0);
  stats.resultant.assign(k_count, Vec3::Zero());
  for (const auto& x : dirs) {
    std::size_t best = 0;
    double best_dot = -2.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      const double d = dirs[seeds[k]].dot(x);
      if (d > best_dot) {
        best_dot = d;
        best = k;
      }
    }
    stats.mass[best] += 1.0;
    stats.resultant[best] += x;
  }
  std::vector<VmfComponent> comps(k_count);
  for (std::size_t k = 0; k < k_count; ++k) comps[k].mu = dirs[seeds[k]];
  mstep(stats, dirs.size(), comps, true);
  // Keep every component reachable by the first E-step.
  for (auto& c : comps) c.weight = std::max(c.weight, 1.0 / static_cast<double>(dirs.size()));
  const double total = std::accumulate(comps.begin(), comps.end(), 0.0,
                                       [](double s, const VmfComponent& c) { return s + c.weight; });
  for (auto& c : comps) c.weight /= total;
  return comps;
}

void sort_by_concentration(VmfMixture& mix) {
  const std::size_t k_count = mix.components.size();
  std::vector<std::size_t> order(k_count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = mix.components[a];
    const auto& cb = mix.components[b];
    if (ca.kappa != cb.kappa) return ca.kappa > cb.kappa;
    return ca.weight > cb.weight;
  });
  std::vector<int> rank(k_count);
  std::vector<VmfComponent> sorted(k_count);
  for (std::size_t r = 0; r < k_count; ++r) {
    sorted[r] = mix.components[order[r]];
    rank[order[r]] = static_cast<int>(r);
  }
  mix.components = std::move(sorted);
  for (auto& l : mix.labels) {
    if (l != kNoLevel) l = rank[static_cast<std::size_t>(l)];
  }
}

}  // namespace

double vmf_log_normalizer(double kappa) {
  if (kappa < 1e-6) {
    // kappa / sinh(kappa) = 1 - kappa^2 / 6 + O(kappa^4).
    return -kLog4Pi - kappa * kappa / 6.0;
  }
  double log_sinh = 0.0;
  if (kappa < 20.0) {
    log_sinh = std::log(std::sinh(kappa));
  } else {
    // sinh k = e^k (1 - e^{-2k}) / 2
    log_sinh = kappa + std::log1p(-std::exp(-2.0 * kappa)) - std::numbers::ln2;
  }
  return std::log(kappa) - kLog4Pi - log_sinh;
}

double vmf_log_pdf(const Vec3& x, const Vec3& mu, double kappa) {
  constexpr double kUnitTol = 1e-6;
  if (!x.allFinite() || std::abs(x.norm() - 1.0) > kUnitTol) {
    throw_invalid("vmf_log_pdf: x is not a unit vector");
  }
  if (!mu.allFinite() || std::abs(mu.norm() - 1.0) > kUnitTol) {
    throw_invalid("vmf_log_pdf: mu is not a unit vector");
  }
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw_invalid("vmf_log_pdf: kappa must be finite and non-negative");
  }
  return vmf_log_normalizer(kappa) + kappa * mu.dot(x);
}

double estimate_kappa(double rbar) {
  if (!(rbar > 0.0)) return kKappaMin;
  if (rbar >= 1.0) return kKappaMax;
  const double kappa = (3.0 * rbar - rbar * rbar * rbar) / (1.0 - rbar * rbar);
  return std::clamp(kappa, kKappaMin, kKappaMax);
}

Vec3 sample_vmf(const Vec3& mu, double kappa, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double w = 0.0;
  if (kappa < 1e-8) {
    w = 2.0 * u - 1.0;
  } else {
    w = 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * kappa)) / kappa;
  }
  w = std::clamp(w, -1.0, 1.0);
  // Orthonormal pair spanning the plane normal to mu.
  const Vec3 m = mu.normalized();
  const Vec3 helper = std::abs(m.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = m.cross(helper).normalized();
  const Vec3 e2 = m.cross(e1);
  const double phi = 2.0 * std::numbers::pi * unit(rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  return (w * m + s * (std::cos(phi) * e1 + std::sin(phi) * e2)).normalized();
}

std::vector<std::size_t> kmeanspp_seeds(std::span<const Vec3> dirs, int k, std::mt19937_64& rng) {
  std::vector<std::size_t> seeds;
  if (dirs.empty() || k <= 0) return seeds;
  std::uniform_int_distribution<std::size_t> pick(0, dirs.size() - 1);
  seeds.push_back(pick(rng));
  std::vector<double> gap(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) gap[i] = 1.0 - dirs[seeds[0]].dot(dirs[i]);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (seeds.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (double g : gap) total += std::max(g, 0.0);
    std::size_t chosen = 0;
    if (total <= 0.0) {
      chosen = pick(rng);
    } else {
      double target = unit(rng) * total;
      chosen = dirs.size() - 1;
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        target -= std::max(gap[i], 0.0);
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
    }
    seeds.push_back(chosen);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      gap[i] = std::min(gap[i], 1.0 - dirs[chosen].dot(dirs[i]));
    }
  }
  return seeds;
}

VmfMixture run_vmf_em(std::span<const Vec3> dirs, std::vector<VmfComponent> comps,
                      const VmfFitOptions& options) {
  VmfMixture mix;
  const std::size_t n = dirs.size();
  double previous = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const auto stats = estep(dirs, comps, options);
    mix.log_likelihood_trace.push_back(stats.log_likelihood);
    mix.iterations = it + 1;
    if (it > 0 &&
        std::abs(stats.log_likelihood - previous) <=
            options.rel_tolerance * std::abs(stats.log_likelihood)) {
      mix.converged = true;
      break;
    }
    previous = stats.log_likelihood;
    if (it + 1 == options.max_iterations) break;
    mstep(stats, n, comps);
  }
  std::vector<double> resp;
  const auto final_stats = estep(dirs, comps, options, &resp);
  mix.log_likelihood = final_stats.log_likelihood;
  mix.labels = argmax_labels(resp, comps.size());
  mix.components = std::move(comps);
  return mix;
}

VmfMixture fit_vmf_mixture(std::span<const Vec3> dirs, int k, std::uint64_t seed,
                           const VmfFitOptions& options) {
  if (k < 1) throw_invalid("mixture needs at least one component");
  const std::size_t needed = 10 * static_cast<std::size_t>(k);
  if (dirs.size() < needed) {
    throw Error(ErrorCode::kInsufficientData,
                "need " + std::to_string(needed) + " valid normals for K=" + std::to_string(k) +
                    ", got " + std::to_string(dirs.size()));
  }

  const int max_attempts = options.n_init + options.max_restarts;
  const double min_mass = options.min_component_fraction * static_cast<double>(dirs.size());
  VmfMixture best;
  bool have_best = false;
  int successes = 0;
  int attempt = 0;
  for (; attempt < max_attempts && successes < options.n_init; ++attempt) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
    const auto seeds = kmeanspp_seeds(dirs, k, rng);
    VmfMixture run = run_vmf_em(dirs, initial_components(dirs, seeds), options);

    bool collapsed = false;
    for (const auto& c : run.components) {
      if (c.weight * static_cast<double>(dirs.size()) < min_mass) collapsed = true;
    }
    if (collapsed) continue;
    ++successes;
    if (!have_best || run.log_likelihood > best.log_likelihood) {
      best = std::move(run);
      have_best = true;
    }
  }
  if (!have_best) {
    throw Error(ErrorCode::kCollapsedComponent,
                "every EM attempt left a component with under " +
                    std::to_string(options.min_component_fraction * 100.0) + "% of the normals");
  }
  best.attempts = attempt;
  sort_by_concentration(best);
  return best;
}

VmfMixture fit_vmf_mixture(const NormalField& normals, int k, std::uint64_t seed,
                           const VmfFitOptions& options) {
  const auto idx = normals.valid_indices();
  const auto dirs = normals.valid_normals();
  VmfMixture mix = fit_vmf_mixture(std::span<const Vec3>(dirs), k, seed, options);
  std::vector<int> labels(normals.size(), kNoLevel);
  for (std::size_t j = 0; j < idx.size(); ++j) labels[idx[j]] = mix.labels[j];
  mix.labels = std::move(labels);
  return mix;
}

double ComplexityProfile::total() const { return std::accumulate(sc.begin(), sc.end(), 0.0); }

ComplexityProfile structural_complexity(const NormalField& normals, const VmfMixture& mixture) {
  if (mixture.labels.size() != normals.size()) {
    throw_invalid("mixture labels do not match the normal field (" +
                  std::to_string(mixture.labels.size()) + " vs " +
                  std::to_string(normals.size()) + ")");
  }
  const std::size_t k_count = mixture.size();
  std::vector<double> nll(k_count, 0.0);
  ComplexityProfile profile;
  profile.group_sizes.assign(k_count, 0);
  std::vector<double> log_c(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    log_c[k] = vmf_log_normalizer(mixture.components[k].kappa);
  }
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const int level = mixture.labels[i];
    if (level == kNoLevel) continue;
    if (!normals.valid[i] || level < 0 || static_cast<std::size_t>(level) >= k_count) {
      throw_invalid("label " + std::to_string(level) + " at point " + std::to_string(i) +
                    " is inconsistent with the normal field");
    }
    const auto& c = mixture.components[static_cast<std::size_t>(level)];
    nll[level] -= log_c[level] + c.kappa * c.mu.dot(normals.normals[i]);
    profile.group_sizes[level] += 1;
  }
  profile.sc.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    if (profile.group_sizes[k] == 0) {
      throw Error(ErrorCode::kEmptyGroup, "complexity level " + std::to_string(k) + " has no points");
    }
    profile.sc[k] = nll[k] / static_cast<double>(profile.group_sizes[k]);
  }
  return profile;
}

}  // namespace forestalign
