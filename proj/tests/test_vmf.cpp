#include <doctest.h>

#include <algorithm>
#include <array>

#include "forestalign/error.hpp"
#include "forestalign/kernels.hpp"
#include "forestalign/vmf.hpp"
#include "support.hpp"
#include "vmf_oracle.hpp"

using namespace forestalign;

namespace {

constexpr double kLog4Pi = 2.5310242469692907;

double angle_deg(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

std::vector<Vec3> draw(const Vec3& mu, double kappa, std::size_t n, std::mt19937_64& rng) {
  std::vector<Vec3> out(n);
  for (auto& x : out) x = fa_test::wood_sample(mu, kappa, rng);
  return out;
}

NormalField field_of(const std::vector<Vec3>& dirs) {
  NormalField f;
  f.normals = dirs;
  f.valid.assign(dirs.size(), 1);
  return f;
}

}  // namespace

TEST_CASE("log pdf examples") {
  const Vec3 mu = Vec3::UnitZ();
  CHECK(std::abs(vmf_log_pdf(Vec3::UnitX(), mu, 0.0) - (-kLog4Pi)) < 1e-12);
  CHECK(std::abs(vmf_log_pdf(Vec3::UnitX(), mu, 0.0) - (-2.53102)) < 1e-5);
  CHECK(std::abs(vmf_log_pdf(mu, mu, 1.0) - std::log(0.18415)) < 1e-3);
  CHECK(std::abs(vmf_log_pdf(-mu, mu, 1.0) - std::log(0.024924)) < 1e-3);
}

TEST_CASE("log pdf matches the Bessel form") {
  std::mt19937_64 rng(1);
  for (double kappa : {1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 19.9, 20.1, 50.0, 100.0, 300.0}) {
    for (int i = 0; i < 20; ++i) {
      const Vec3 mu = fa_test::uniform_direction(rng);
      const Vec3 x = fa_test::uniform_direction(rng);
      const double want = fa_test::bessel_log_pdf(mu.dot(x), kappa);
      CHECK(std::abs(vmf_log_pdf(x, mu, kappa) - want) < 1e-9 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("normalizer is continuous and finite at the extremes") {
  CHECK(std::abs(vmf_log_normalizer(0.0) + kLog4Pi) < 1e-15);
  CHECK(std::abs(vmf_log_normalizer(1e-7) - vmf_log_normalizer(2e-6)) < 1e-9);
  const double big = vmf_log_normalizer(1e4);
  CHECK(std::isfinite(big));
  // log(k / (2 pi)) - k once sinh k is e^k / 2 to double precision.
  CHECK(std::abs(big - (std::log(1e4 / (2 * std::numbers::pi)) - 1e4)) < 1e-9);
  CHECK(std::isfinite(vmf_log_pdf(Vec3::UnitZ(), Vec3::UnitZ(), 1e4)));
}

TEST_CASE("density integrates to one") {
  for (double kappa : {0.0, 0.1, 1.0, 10.0, 100.0, 1e4}) {
    // 2 pi * integral over cos angle, composite Simpson on a fine grid.
    const int n = 200000;
    const double h = 2.0 / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = -1.0 + i * h;
      const double f = std::exp(vmf_log_normalizer(kappa) + kappa * w);
      s += (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f;
    }
    const double total = 2 * std::numbers::pi * s * h / 3.0;
    CHECK(std::abs(total - 1.0) < 1e-6);
  }
}

TEST_CASE("log pdf argument checks") {
  CHECK_THROWS_AS(vmf_log_pdf(Vec3(2, 0, 0), Vec3::UnitZ(), 1.0), Error);
  CHECK_THROWS_AS(vmf_log_pdf(Vec3::UnitX(), Vec3(0, 0, 0.5), 1.0), Error);
  CHECK_THROWS_AS(vmf_log_pdf(Vec3::UnitX(), Vec3::UnitZ(), -1.0), Error);
  CHECK_NOTHROW(vmf_log_pdf(Vec3(1 + 5e-7, 0, 0), Vec3::UnitZ(), 1.0));
}

TEST_CASE("concentration estimate") {
  CHECK(estimate_kappa(0.0) == kKappaMin);
  CHECK(estimate_kappa(1.0) == kKappaMax);
  CHECK(estimate_kappa(0.9999999) == kKappaMax);
  CHECK(std::abs(estimate_kappa(0.5) - (1.5 - 0.125) / 0.75) < 1e-15);
  double prev = 0.0;
  for (double r = 0.01; r < 0.999; r += 0.01) {
    const double k = estimate_kappa(r);
    CHECK(k > prev);
    prev = k;
  }
}

TEST_CASE("library sampler has the right mean cosine") {
  std::mt19937_64 rng(2);
  for (double kappa : {0.5, 5.0, 50.0, 500.0}) {
    const Vec3 mu = fa_test::uniform_direction(rng);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = sample_vmf(mu, kappa, rng).dot(mu);
      s += w;
      s2 += w * w;
    }
    const double mean = s / n;
    const double sd = std::sqrt(s2 / n - mean * mean);
    const double want = 1.0 / std::tanh(kappa) - 1.0 / kappa;
    CHECK(std::abs(mean - want) < 4.0 * sd / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("single component recovery") {
  std::mt19937_64 rng(3);
  const auto dirs = draw(Vec3::UnitZ(), 100.0, 10000, rng);
  const auto mix = fit_vmf_mixture(dirs, 1, 7);
  REQUIRE(mix.size() == 1);
  CHECK(angle_deg(mix.components[0].mu, Vec3::UnitZ()) < 2.0);
  CHECK(std::abs(mix.components[0].kappa - 100.0) < 15.0);
  CHECK(std::abs(mix.components[0].weight - 1.0) < 1e-12);
}

TEST_CASE("identical directions clamp to a point mass") {
  const Vec3 d = Vec3(1, 2, 3).normalized();
  const std::vector<Vec3> dirs(200, d);
  const auto mix = fit_vmf_mixture(dirs, 1, 1);
  CHECK(mix.components[0].kappa == kKappaMax);
  CHECK((mix.components[0].mu - d).norm() < 1e-12);
}

TEST_CASE("three component recovery") {
  std::mt19937_64 rng(4);
  const std::array<Vec3, 3> mus = {Vec3::UnitZ(), Vec3(1, 0, 0.2).normalized(),
                                   Vec3(-0.3, -1, 0.1).normalized()};
  const std::array<double, 3> kappas = {500.0, 50.0, 5.0};
  std::vector<Vec3> dirs;
  std::vector<int> truth;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3333; ++i) {
      dirs.push_back(fa_test::wood_sample(mus[k], kappas[k], rng));
      truth.push_back(k);
    }
  }
  const auto mix = fit_vmf_mixture(dirs, 3, 11);
  REQUIRE(mix.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(angle_deg(mix.components[k].mu, mus[k]) < 5.0);
    CHECK(std::abs(mix.components[k].kappa - kappas[k]) < 0.15 * kappas[k]);
  }
  std::array<int, 3> perm = {0, 1, 2};
  double best = 0.0;
  do {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < dirs.size(); ++i) hit += mix.labels[i] == perm[truth[i]];
    best = std::max(best, static_cast<double>(hit) / dirs.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(best >= 0.9);
}

TEST_CASE("fitted mixtures are well formed") {
  std::mt19937_64 rng(5);
  std::vector<Vec3> dirs;
  for (int i = 0; i < 3000; ++i) dirs.push_back(fa_test::uniform_direction(rng));
  for (int k = 1; k <= 4; ++k) {
    const auto mix = fit_vmf_mixture(dirs, k, 3);
    REQUIRE(mix.size() == static_cast<std::size_t>(k));
    CHECK(mix.labels.size() == dirs.size());
    double wsum = 0.0;
    for (std::size_t c = 0; c < mix.size(); ++c) {
      wsum += mix.components[c].weight;
      CHECK(std::abs(mix.components[c].mu.norm() - 1.0) < 1e-9);
      CHECK(mix.components[c].kappa >= 0.0);
      if (c > 0) CHECK(mix.components[c - 1].kappa >= mix.components[c].kappa);
    }
    CHECK(std::abs(wsum - 1.0) < 1e-9);
    for (int l : mix.labels) CHECK((l >= 0 && l < k));
    CHECK(mix.attempts >= 5);
  }
}

TEST_CASE("invalid normals get no level") {
  std::mt19937_64 rng(6);
  auto field = field_of(draw(Vec3::UnitZ(), 20.0, 500, rng));
  field.valid[3] = 0;
  field.normals[3] = Vec3::Zero();
  const auto mix = fit_vmf_mixture(field, 2, 1);
  REQUIRE(mix.labels.size() == 500);
  CHECK(mix.labels[3] == kNoLevel);
  for (std::size_t i = 0; i < 500; ++i) {
    if (i != 3) CHECK(mix.labels[i] >= 0);
  }
}

TEST_CASE("log likelihood never decreases") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> dirs;
    const int k = 1 + trial % 4;
    for (int c = 0; c < k; ++c) {
      const auto part = draw(fa_test::uniform_direction(rng), 2.0 + 40.0 * c, 1500, rng);
      dirs.insert(dirs.end(), part.begin(), part.end());
    }
    VmfFitOptions options;
    options.rel_tolerance = 0.0;
    options.max_iterations = 100;
    std::mt19937_64 seed_rng(trial);
    const auto seeds = kmeanspp_seeds(dirs, k, seed_rng);
    std::vector<VmfComponent> start(k);
    for (int c = 0; c < k; ++c) {
      start[c].mu = dirs[seeds[c]];
      start[c].kappa = 1.0;
      start[c].weight = 1.0 / k;
    }
    const auto run = run_vmf_em(dirs, start, options);
    for (std::size_t i = 1; i < run.log_likelihood_trace.size(); ++i) {
      CHECK(run.log_likelihood_trace[i] >= run.log_likelihood_trace[i - 1] - 1e-9);
    }
    const auto fit = fit_vmf_mixture(dirs, k, trial);
    for (std::size_t i = 1; i < fit.log_likelihood_trace.size(); ++i) {
      CHECK(fit.log_likelihood_trace[i] >= fit.log_likelihood_trace[i - 1] - 1e-9);
    }
  }
}

TEST_CASE("responsibilities sum to one") {
  std::mt19937_64 rng(8);
  std::vector<Vec3> dirs;
  for (int i = 0; i < 5000; ++i) dirs.push_back(fa_test::uniform_direction(rng));
  kernels::VmfTerms terms;
  const std::array<double, 4> kappas = {1e4, 300.0, 2.0, 1e-3};
  for (int k = 0; k < 4; ++k) {
    terms.log_offset.push_back(std::log(0.25) + vmf_log_normalizer(kappas[k]));
    terms.kappa_mu.push_back(kappas[k] * fa_test::uniform_direction(rng));
  }
  std::vector<double> resp;
  (void)kernels::vmf_estep_parallel(dirs, terms, &resp);
  REQUIRE(resp.size() == dirs.size() * 4);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) {
      CHECK(resp[i * 4 + k] >= 0.0);
      s += resp[i * 4 + k];
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("fit is invariant to the order of the data") {
  std::mt19937_64 rng(9);
  std::vector<Vec3> dirs = draw(Vec3::UnitZ(), 200.0, 2000, rng);
  const auto more = draw(Vec3::UnitX(), 10.0, 2000, rng);
  dirs.insert(dirs.end(), more.begin(), more.end());
  std::vector<VmfComponent> start(2);
  start[0] = {dirs[0], 1.0, 0.5};
  start[1] = {dirs[2500], 1.0, 0.5};
  auto shuffled = dirs;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto a = run_vmf_em(dirs, start);
  const auto b = run_vmf_em(shuffled, start);
  REQUIRE(a.iterations == b.iterations);
  for (int k = 0; k < 2; ++k) {
    CHECK((a.components[k].mu - b.components[k].mu).norm() < 1e-9);
    CHECK(std::abs(a.components[k].kappa - b.components[k].kappa) <
          1e-9 * std::max(1.0, a.components[k].kappa));
    CHECK(std::abs(a.components[k].weight - b.components[k].weight) < 1e-9);
  }
}

TEST_CASE("fit is deterministic in the seed") {
  std::mt19937_64 rng(10);
  std::vector<Vec3> dirs;
  for (int i = 0; i < 4000; ++i) dirs.push_back(fa_test::uniform_direction(rng));
  const auto a = fit_vmf_mixture(dirs, 3, 42);
  const auto b = fit_vmf_mixture(dirs, 3, 42);
  CHECK(a.labels == b.labels);
  CHECK(a.log_likelihood == b.log_likelihood);
  for (int k = 0; k < 3; ++k) {
    CHECK(a.components[k].mu == b.components[k].mu);
    CHECK(a.components[k].kappa == b.components[k].kappa);
  }
  VmfFitOptions serial;
  serial.parallel = false;
  const auto c = fit_vmf_mixture(dirs, 3, 42, serial);
  CHECK(a.labels == c.labels);
  CHECK(a.log_likelihood == c.log_likelihood);
}

TEST_CASE("fit errors") {
  std::mt19937_64 rng(11);
  const auto dirs = draw(Vec3::UnitZ(), 5.0, 29, rng);
  try {
    (void)fit_vmf_mixture(dirs, 3, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientData);
  }
  CHECK_NOTHROW(fit_vmf_mixture(std::span<const Vec3>(dirs).first(20), 2, 1));
  CHECK_THROWS_AS(fit_vmf_mixture(dirs, 0, 1), Error);

  VmfFitOptions strict;
  strict.min_component_fraction = 0.6;
  try {
    (void)fit_vmf_mixture(dirs, 2, 1, strict);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCollapsedComponent);
  }
}

TEST_CASE("seeding picks distinct directions") {
  std::mt19937_64 rng(12);
  std::vector<Vec3> dirs(100, Vec3::UnitZ());
  dirs[50] = Vec3::UnitX();
  dirs[70] = -Vec3::UnitY();
  std::mt19937_64 seed_rng(1);
  auto seeds = kmeanspp_seeds(dirs, 3, seed_rng);
  REQUIRE(seeds.size() == 3);
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::count(seeds.begin(), seeds.end(), 50) == 1);
  CHECK(std::count(seeds.begin(), seeds.end(), 70) == 1);
}

TEST_CASE("complexity of a point group at unit concentration") {
  const Vec3 mu = Vec3(0, 1, 1).normalized();
  const auto field = field_of(std::vector<Vec3>(40, mu));
  VmfMixture mix;
  mix.components = {{mu, 1.0, 1.0}};
  mix.labels.assign(40, 0);
  const auto profile = structural_complexity(field, mix);
  const double want = -fa_test::bessel_log_pdf(1.0, 1.0);
  CHECK(std::abs(profile.sc[0] - want) < 1e-12);
  CHECK(std::abs(profile.sc[0] - 1.6921) < 1e-3);
  CHECK(profile.group_sizes[0] == 40);
  CHECK(profile.total() == profile.sc[0]);
}

TEST_CASE("tighter groups score lower complexity") {
  std::mt19937_64 rng(13);
  const std::array<double, 5> kappas = {2.0, 8.0, 30.0, 120.0, 500.0};
  for (std::size_t i = 0; i + 1 < kappas.size(); ++i) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto tight = field_of(draw(Vec3::UnitZ(), kappas[i + 1], 3000, rng));
      const auto loose = field_of(draw(Vec3::UnitZ(), kappas[i], 3000, rng));
      const auto sc_tight = structural_complexity(tight, fit_vmf_mixture(tight, 1, rep)).sc[0];
      const auto sc_loose = structural_complexity(loose, fit_vmf_mixture(loose, 1, rep)).sc[0];
      CHECK(sc_tight < sc_loose);
    }
  }
}

TEST_CASE("uniform directions approach the sphere entropy") {
  std::mt19937_64 rng(14);
  std::vector<Vec3> dirs;
  for (int i = 0; i < 100000; ++i) dirs.push_back(fa_test::uniform_direction(rng));
  const auto field = field_of(dirs);
  const auto mix = fit_vmf_mixture(field, 1, 1);
  CHECK(mix.components[0].kappa < 0.05);
  CHECK(std::abs(structural_complexity(field, mix).sc[0] - kLog4Pi) < 1e-3);
}

TEST_CASE("complexity errors") {
  const auto field = field_of(std::vector<Vec3>(10, Vec3::UnitZ()));
  VmfMixture mix;
  mix.components = {{Vec3::UnitZ(), 5.0, 0.5}, {Vec3::UnitX(), 1.0, 0.5}};
  mix.labels.assign(10, 0);
  try {
    (void)structural_complexity(field, mix);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyGroup);
  }
  mix.labels.assign(9, 0);
  CHECK_THROWS_AS(structural_complexity(field, mix), Error);
}
