// forestalign command-line tool: register, synth, eval, inspect.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "forestalign/error.hpp"
#include "forestalign/evaluation.hpp"
#include "forestalign/forest_align.hpp"
#include "forestalign/io.hpp"
#include "forestalign/parallel.hpp"
#include "forestalign/scene.hpp"

namespace fa = forestalign;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kNoOverlap = 2, kInsufficientData = 3 };

int exit_code_for(fa::ErrorCode code) {
  switch (code) {
    case fa::ErrorCode::kNoOverlap:
    case fa::ErrorCode::kDegenerateCorrespondences:
      return kNoOverlap;
    case fa::ErrorCode::kInsufficientData:
    case fa::ErrorCode::kCollapsedComponent:
    case fa::ErrorCode::kEmptyGroup:
    case fa::ErrorCode::kEmptyInput:
    case fa::ErrorCode::kDegenerateNeighborhood:
      return kInsufficientData;
    case fa::ErrorCode::kInvalidParameter:
    case fa::ErrorCode::kParse:
    case fa::ErrorCode::kIo:
      return kFailure;
  }
  return kFailure;
}

struct RegisterArgs {
  std::string source;
  std::string target;
  std::string out = "transform.json";
  std::string aligned_out;
  std::string report;
};

struct SynthArgs {
  std::string out_dir = ".";
  int trees = 30;
  double separation = 33.0;
  double extent = 100.0;
  double amplitude = 2.0;
  double grass = 0.0;
  double points = 3e6;
  bool aerial = false;
  double aerial_density = 15.0;
  std::uint64_t seed = 1;
};

struct EvalArgs {
  std::string source;
  std::string target;
  std::string truth;
  std::string out_dir = ".";
  fa::TrialSpec trials;
};

struct InspectArgs {
  std::string cloud;
  int k = 3;
  double voxel = 0.05;
  double radius = 0.25;
  std::uint64_t seed = 0;
  bool group = true;
};

void add_config_flags(CLI::App* cmd, fa::ForestAlignConfig& cfg, bool with_seed = true) {
  cmd->add_option("--k-source", cfg.k_source, "complexity levels of the source")
      ->capture_default_str();
  cmd->add_option("--k-target", cfg.k_target, "complexity levels of the target")
      ->capture_default_str();
  cmd->add_option("--voxel", cfg.voxel, "grouping voxel size (m)")->capture_default_str();
  cmd->add_option("--refine-voxel", cfg.refine_voxel, "refinement voxel size (m)")
      ->capture_default_str();
  cmd->add_option("--radius", cfg.normal_radius, "normal neighborhood radius (m)")
      ->capture_default_str();
  cmd->add_option("--max-corr-dist", cfg.icp.max_corr_dist, "ICP correspondence gate (m)")
      ->capture_default_str();
  if (with_seed) cmd->add_option("--seed", cfg.seed, "grouping seed")->capture_default_str();
}

json config_metadata(const fa::ForestAlignConfig& cfg) {
  return json{{"config", fa::io::to_json(cfg)},
              {"config_hash", fa::io::config_hash(cfg)},
              {"tool_version", FORESTALIGN_VERSION}};
}

int run_register(const RegisterArgs& args, const fa::ForestAlignConfig& cfg) {
  const fa::PointCloud source = fa::io::read_cloud(args.source);
  const fa::PointCloud target = fa::io::read_cloud(args.target);

  fa::RegistrationResult result;
  try {
    result = fa::forest_align(source, target, cfg);
  } catch (const fa::NoOverlapError& e) {
    std::cerr << "forestalign: " << e.what() << "\n";
    return kNoOverlap;
  }

  fa::io::TransformRecord record;
  record.transform = result.final_transform;
  record.metadata = config_metadata(cfg);
  record.metadata["source"] = args.source;
  record.metadata["target"] = args.target;
  record.metadata["converged"] = result.converged;
  record.metadata["inlier_rmse"] = result.inlier_rmse;
  record.metadata["overlap_percent"] = result.overlap_percent;
  record.run = {{"timestamp", fa::io::utc_timestamp()}, {"wall_seconds", result.wall_seconds}};
  fa::io::write_transform_record(record, args.out);

  if (!args.aligned_out.empty()) {
    fa::io::write_cloud(fa::apply_transform(source, result.final_transform), args.aligned_out);
  }
  if (!args.report.empty()) {
    json report = fa::io::to_json(result);
    report["metadata"] = record.metadata;
    fa::io::write_text_atomic(args.report, fa::io::dump(report));
  }
  std::cout << "converged=" << (result.converged ? "true" : "false")
            << " inlier_rmse=" << result.inlier_rmse
            << " overlap_percent=" << result.overlap_percent << "\n";
  return kOk;
}

int run_synth(const SynthArgs& args) {
  fa::PairSpec spec = fa::tls_pair_spec(args.separation, args.seed);
  spec.scene.n_trees = args.trees;
  spec.scene.extent = args.extent;
  spec.scene.ground_amplitude = args.amplitude;
  spec.scene.grass_density = args.grass;
  spec.scene.total_points = static_cast<std::size_t>(args.points);
  spec.aerial_target = args.aerial;
  spec.aerial.density = args.aerial_density;
  const fa::ScanPair pair = fa::make_scan_pair(spec);

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  fa::io::write_ply(pair.source.cloud, dir / "source.ply");
  fa::io::write_ply(pair.target.cloud, dir / "target.ply");

  fa::io::TransformRecord truth;
  truth.transform = pair.truth;
  truth.metadata = {
      {"labels", {{"0", "ground"}, {"1", "trunk"}, {"2", "foliage"}}},
      {"label_property", "label"},
      {"scene",
       {{"seed", args.seed},
        {"trees", args.trees},
        {"extent", args.extent},
        {"ground_amplitude", args.amplitude},
        {"grass_density", args.grass},
        {"total_points", spec.scene.total_points}}},
      {"separation", args.separation},
      {"aerial_target", args.aerial},
      {"source_points", pair.source.cloud.size()},
      {"target_points", pair.target.cloud.size()},
      {"tool_version", FORESTALIGN_VERSION}};
  fa::io::write_transform_record(truth, dir / "truth.json");
  std::cout << "source=" << pair.source.cloud.size() << " target=" << pair.target.cloud.size()
            << "\n";
  return kOk;
}

int run_eval(const EvalArgs& args, const fa::ForestAlignConfig& cfg) {
  const fa::PointCloud source = fa::io::read_cloud(args.source);
  const fa::PointCloud target = fa::io::read_cloud(args.target);
  const fa::io::TransformRecord truth = fa::io::read_transform_record(args.truth);
  const fa::TrialReport report =
      fa::run_trials(source, target, truth.transform, args.trials, cfg);

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  fa::io::write_text_atomic(dir / "trials.csv", fa::io::trials_csv(report));
  json summary = fa::io::trials_summary(report, args.trials, cfg);
  summary["source"] = args.source;
  summary["target"] = args.target;
  summary["truth"] = args.truth;
  fa::io::write_text_atomic(dir / "summary.json", fa::io::dump(summary));

  const auto& r = report.rmse;
  std::printf("rmse roll=%.4f pitch=%.4f yaw=%.4f deg  tx=%.4f ty=%.4f tz=%.4f m  failed=%zu/%zu\n",
              r[0], r[1], r[2], r[3], r[4], r[5], report.failed, report.trials.size());
  return kOk;
}

int run_inspect(const InspectArgs& args) {
  const fa::PointCloud cloud = fa::io::read_cloud(args.cloud);
  json out;
  out["points"] = cloud.size();
  out["labeled"] = cloud.has_labels();
  if (!cloud.empty()) {
    const fa::Vec3 lo = cloud.min_bound();
    const fa::Vec3 hi = cloud.max_bound();
    out["min"] = {lo.x(), lo.y(), lo.z()};
    out["max"] = {hi.x(), hi.y(), hi.z()};
  }
  if (args.group) {
    const fa::CloudGrouping g =
        fa::group_by_complexity(cloud, args.voxel, args.radius, args.k, args.seed);
    out["downsampled_points"] = g.cloud.size();
    out["valid_normals"] = g.normals.valid_count();
    json levels = json::array();
    for (std::size_t k = 0; k < g.mixture.size(); ++k) {
      const auto& c = g.mixture.components[k];
      levels.push_back({{"level", k},
                        {"kappa", c.kappa},
                        {"weight", c.weight},
                        {"mu", {c.mu.x(), c.mu.y(), c.mu.z()}},
                        {"complexity", g.profile.sc[k]},
                        {"points", g.profile.group_sizes[k]}});
    }
    out["levels"] = std::move(levels);
    out["log_likelihood"] = g.mixture.log_likelihood;
  }
  std::cout << fa::io::dump(out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forestalign: structure-ordered point cloud co-registration"};
  app.set_version_flag("--version", std::string(FORESTALIGN_VERSION));
  app.require_subcommand(1);

  fa::ForestAlignConfig cfg;

  RegisterArgs reg;
  auto* reg_cmd = app.add_subcommand("register", "align a source cloud onto a target cloud");
  reg_cmd->add_option("--source", reg.source, "source cloud (.ply/.xyz)")->required();
  reg_cmd->add_option("--target", reg.target, "target cloud (.ply/.xyz)")->required();
  reg_cmd->add_option("--out", reg.out, "transform JSON")->capture_default_str();
  reg_cmd->add_option("--aligned-out", reg.aligned_out, "write the transformed source here");
  reg_cmd->add_option("--report", reg.report, "per-stage diagnostics JSON");
  add_config_flags(reg_cmd, cfg);

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "write a synthetic scan pair with ground truth");
  syn_cmd->add_option("--out-dir", syn.out_dir, "output directory")->capture_default_str();
  syn_cmd->add_option("--trees", syn.trees, "number of trees")->capture_default_str();
  syn_cmd->add_option("--separation", syn.separation, "scanner separation (m)")
      ->capture_default_str();
  syn_cmd->add_option("--extent", syn.extent, "plot side (m)")->capture_default_str();
  syn_cmd->add_option("--amplitude", syn.amplitude, "terrain amplitude (m)")
      ->capture_default_str();
  syn_cmd->add_option("--grass", syn.grass, "grass blades per m^2")->capture_default_str();
  syn_cmd->add_option("--points", syn.points, "reference sampling size")->capture_default_str();
  syn_cmd->add_flag("--aerial", syn.aerial, "make the target an airborne-style view");
  syn_cmd->add_option("--aerial-density", syn.aerial_density, "airborne points per m^2")
      ->capture_default_str();
  syn_cmd->add_option("--seed", syn.seed, "scene seed")->capture_default_str();

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "run the random-perturbation trial protocol");
  ev_cmd->add_option("--source", ev.source, "source cloud")->required();
  ev_cmd->add_option("--target", ev.target, "target cloud")->required();
  ev_cmd->add_option("--truth", ev.truth, "truth.json from synth")->required();
  ev_cmd->add_option("--out-dir", ev.out_dir, "output directory")->capture_default_str();
  ev_cmd->add_option("--trials", ev.trials.n_trials, "number of trials")->capture_default_str();
  ev_cmd->add_option("--rot-range", ev.trials.rot_range, "max rotation offset (deg)")
      ->capture_default_str();
  ev_cmd->add_option("--trans-range", ev.trials.trans_range, "max translation offset (m)")
      ->capture_default_str();
  ev_cmd->add_option("--seed", ev.trials.seed, "perturbation seed")->capture_default_str();
  add_config_flags(ev_cmd, cfg, false);

  InspectArgs ins;
  auto* ins_cmd = app.add_subcommand("inspect", "print cloud statistics and its grouping");
  ins_cmd->add_option("--cloud", ins.cloud, "cloud to inspect")->required();
  ins_cmd->add_option("--k", ins.k, "complexity levels")->capture_default_str();
  ins_cmd->add_option("--voxel", ins.voxel, "voxel size (m)")->capture_default_str();
  ins_cmd->add_option("--radius", ins.radius, "normal radius (m)")->capture_default_str();
  ins_cmd->add_option("--seed", ins.seed, "grouping seed")->capture_default_str();
  ins_cmd->add_flag("!--no-group", ins.group, "skip the grouping");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kFailure;
  }

  fa::parallel::configure_threads_from_env();
  try {
    if (*reg_cmd) {
      cfg.validate();
      return run_register(reg, cfg);
    }
    if (*syn_cmd) return run_synth(syn);
    if (*ev_cmd) {
      cfg.validate();
      ev.trials.validate();
      return run_eval(ev, cfg);
    }
    if (*ins_cmd) return run_inspect(ins);
  } catch (const fa::Error& e) {
    std::cerr << "forestalign: " << e.what() << "\n";
    if (e.code() == fa::ErrorCode::kInvalidParameter) std::cerr << app.help();
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "forestalign: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
