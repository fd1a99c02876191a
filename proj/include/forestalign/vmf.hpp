#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "forestalign/geometry.hpp"
#include "forestalign/normals.hpp"

namespace forestalign {

/// Concentration bounds applied by the M-step. The lower bound keeps the
/// normalizer away from its removable singularity at 0, the upper bound
/// keeps point masses finite.
inline constexpr double kKappaMin = 1e-3;
inline constexpr double kKappaMax = 1e4;

/// Label stored for directions that were excluded from the fit.
inline constexpr int kNoLevel = -1;

struct VmfComponent {
  Vec3 mu = Vec3::UnitZ();
  double kappa = 1.0;
  double weight = 1.0;
};

/// Fitted mixture. Components are sorted by decreasing kappa, so level 0 is
/// the most concentrated (least complex) group.
struct VmfMixture {
  std::vector<VmfComponent> components;
  /// One entry per input direction (per NormalField entry when fitted from
  /// a field); kNoLevel for invalid normals.
  std::vector<int> labels;
  double log_likelihood = 0.0;
  /// Observed-data log likelihood after each E-step of the winning run.
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  int attempts = 0;
  bool converged = false;

  std::size_t size() const noexcept { return components.size(); }
};

/// log c_3(kappa) = log(kappa / (4 pi sinh kappa)); equals -log(4 pi) at 0.
double vmf_log_normalizer(double kappa);

/// Log density of a 3-D von Mises-Fisher distribution at unit vector x.
/// Throws kInvalidParameter if x or mu is not unit length within 1e-6 or
/// kappa is negative.
double vmf_log_pdf(const Vec3& x, const Vec3& mu, double kappa);

/// Closed-form concentration estimate from the mean resultant length,
/// (3 r - r^3) / (1 - r^2), clamped to [kKappaMin, kKappaMax].
double estimate_kappa(double mean_resultant_length);

/// Draws one unit vector from vMF(mu, kappa) by inverting the CDF of the
/// cosine to mu.
Vec3 sample_vmf(const Vec3& mu, double kappa, std::mt19937_64& rng);

struct VmfFitOptions {
  int max_iterations = 200;
  double rel_tolerance = 1e-6;
  /// Successful initializations to compare; the best log likelihood wins.
  int n_init = 5;
  /// Extra attempts allowed when runs end with a collapsed component.
  int max_restarts = 5;
  /// A component holding less than this fraction of the data has collapsed.
  double min_component_fraction = 1e-3;
  bool parallel = true;
};

/// Fits a K-component mixture to the valid normals of `normals` by EM.
/// Throws kInsufficientData when fewer than 10 K valid normals are present
/// and kCollapsedComponent when no attempt keeps every component alive.
VmfMixture fit_vmf_mixture(const NormalField& normals, int k, std::uint64_t seed,
                           const VmfFitOptions& options = {});
VmfMixture fit_vmf_mixture(std::span<const Vec3> directions, int k, std::uint64_t seed,
                           const VmfFitOptions& options = {});

/// Spherical k-means++ seeding: the first center is uniform, each next
/// center is drawn with probability proportional to 1 - max cos to the
/// centers chosen so far. Returns indices into `directions`.
std::vector<std::size_t> kmeanspp_seeds(std::span<const Vec3> directions, int k,
                                        std::mt19937_64& rng);

/// One EM run from a given starting mixture, without restarts, collapse
/// checks or reordering. Labels are argmax responsibilities.
VmfMixture run_vmf_em(std::span<const Vec3> directions, std::vector<VmfComponent> start,
                      const VmfFitOptions& options = {});

/// Per-group structural complexity: the average negative log density of the
/// group's normals under the group's own component, in nats per point.
struct ComplexityProfile {
  std::vector<double> sc;
  std::vector<std::size_t> group_sizes;

  std::size_t size() const noexcept { return sc.size(); }
  double total() const;
};

/// Throws kEmptyGroup when some level has no member, kInvalidParameter when
/// the labels do not line up with the normal field.
ComplexityProfile structural_complexity(const NormalField& normals, const VmfMixture& mixture);

}  // namespace forestalign
