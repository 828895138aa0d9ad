// Command-line front end: synthetic data generation, the detect/crop/regress
// pipeline, training and evaluation drivers, camera calibration utilities.
// Every run is deterministic for a fixed --seed; exit code 2 flags usage
// errors, 1 any library failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "handpose/calib.hpp"
#include "handpose/error.hpp"
#include "handpose/heatmap.hpp"
#include "handpose/image_io.hpp"
#include "handpose/log.hpp"
#include "handpose/manifest.hpp"
#include "handpose/net.hpp"
#include "handpose/pipeline.hpp"
#include "handpose/synth.hpp"
#include "handpose/textfmt.hpp"

namespace {

using namespace handpose;

std::string default_data_dir(const std::string& manifest_path) {
  const std::string dir = std::filesystem::path(manifest_path).parent_path().string();
  return dir.empty() ? std::string(".") : dir;
}

// Timestamp streams: one sample per line, `timestamp_ms [payload_id]`,
// blank lines and #-comments ignored.
std::vector<TimedSample> load_stream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open stream file '" + path + "'");
  std::vector<TimedSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string token;
    std::vector<std::string> tokens;
    while (fields >> token) tokens.push_back(token);
    if (tokens.empty()) continue;
    if (tokens.size() > 2) throw ParseError("expected `timestamp [id]`", line_no);
    TimedSample sample;
    if (!parse_double(tokens[0], sample.timestamp_ms))
      throw ParseError("bad timestamp '" + tokens[0] + "'", line_no);
    sample.payload_id = tokens.size() == 2 ? std::stoll(tokens[1])
                                           : static_cast<std::int64_t>(samples.size());
    samples.push_back(sample);
  }
  return samples;
}

struct GenSynthArgs {
  SynthConfig cfg;
  std::string out;
};

int run_gen_synth(const GenSynthArgs& args) {
  const DatasetManifest manifest = generate_synthetic_dataset(args.cfg, args.out);
  log_info("generated " + std::to_string(manifest.records.size()) + " records");
  std::cout << "wrote " << manifest.records.size() << " records to "
            << (std::filesystem::path(args.out) / "manifest.txt").string() << "\n";
  return 0;
}

struct RasterizeArgs {
  std::string manifest_path;
  std::size_t index = 0;
  RasterSpec raster;
  std::string out;
};

int run_rasterize(const RasterizeArgs& args) {
  const DatasetManifest manifest = load_manifest(args.manifest_path);
  if (args.index >= manifest.records.size())
    throw InvalidInputError("--index " + std::to_string(args.index) + " is out of range (" +
                            std::to_string(manifest.records.size()) + " records)");
  OracleSkeletonOptions options;
  options.raster = args.raster;
  const SkeletonImage img =
      oracle_skeleton(manifest.records[args.index], manifest.joint_count, options, args.index);
  write_image(from_planes({img}), args.out);
  std::cout << "wrote " << args.out << "\n";
  return 0;
}

struct EncodeArgs {
  double x = 0.0, y = 0.0;
  int width = 128, height = 128;
  GaussianSpec spec;
  std::string out;
};

int run_encode(const EncodeArgs& args) {
  const Heatmap map = encode_joint({args.x, args.y}, args.width, args.height, args.spec);
  write_image(from_planes({map}), args.out);
  std::cout << "wrote " << args.out << "\n";
  return 0;
}

int run_decode(const std::string& in) {
  const ImageBuffer image = read_image(in);
  if (image.channels != 1)
    throw InvalidInputError("decode expects a single-channel graymap, got " +
                            std::to_string(image.channels) + " channels");
  const Keypoint joint = decode_argmax(to_planes(image)[0]);
  std::cout << format_double(joint.x) << ' ' << format_double(joint.y) << "\n";
  return 0;
}

struct DetectArgs {
  std::string manifest_path;
  DetectorThresholds thresholds;
  OracleSkeletonOptions oracle;
  std::vector<int> sweep;
  std::string out_dir;
};

int run_detect_cmd(const DetectArgs& args) {
  const DatasetManifest manifest = load_manifest(args.manifest_path);
  const DetectReport report = run_detect(manifest, args.thresholds, args.oracle, args.sweep);
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    const std::filesystem::path dir(args.out_dir);
    write_detect_csv(report, manifest, (dir / "detect.csv").string());
    if (!report.sweep_counts.empty()) write_sweep_csv(report, (dir / "sweep.csv").string());
  }
  std::cout << "mean_iou=" << format_double(report.mean_iou)
            << " accuracy=" << format_double(report.classification.accuracy)
            << " precision=" << format_double(report.classification.precision)
            << " recall=" << format_double(report.classification.recall)
            << " f1=" << format_double(report.classification.f1) << "\n";
  if (!report.sweep_counts.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < report.sweep_auc.size(); ++i)
      if (report.sweep_auc[i] > report.sweep_auc[best]) best = i;
    std::cout << "best_presence_count=" << report.sweep_counts[best]
              << " best_auc=" << format_double(report.sweep_auc[best]) << "\n";
  }
  return 0;
}

struct TrainArgs {
  std::string manifest_path;
  std::string data_dir;
  std::string params_out;
  std::string variant = "multi-skeleton";
  PoseTrainOptions options;
};

int run_train(const TrainArgs& args) {
  const DatasetManifest manifest = load_manifest(args.manifest_path);
  PoseTrainOptions options = args.options;
  options.variant = parse_variant(args.variant);
  const std::string data_dir =
      args.data_dir.empty() ? default_data_dir(args.manifest_path) : args.data_dir;
  TrainResult result = train_pose_model(manifest, data_dir, options);
  for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e)
    log_info("epoch " + std::to_string(e) + " mean loss " +
             format_double(result.epoch_mean_loss[e]));
  save_checkpoint(result.params, args.params_out);
  std::cout << "epochs=" << result.epoch_mean_loss.size() << " final_loss="
            << (result.epoch_mean_loss.empty() ? std::string("na")
                                               : format_double(result.epoch_mean_loss.back()))
            << " params=" << args.params_out << "\n";
  return 0;
}

struct EvalArgs {
  std::string manifest_path;
  std::string data_dir;
  std::string params_path;
  std::string variant = "multi-skeleton";
  PoseEvalOptions options;
  std::string out_dir;
};

int run_eval(const EvalArgs& args) {
  const DatasetManifest manifest = load_manifest(args.manifest_path);
  const NetworkParams params = load_checkpoint(args.params_path);
  PoseEvalOptions options = args.options;
  options.variant = parse_variant(args.variant);
  const std::string data_dir =
      args.data_dir.empty() ? default_data_dir(args.manifest_path) : args.data_dir;
  const PoseEvalReport report = run_pose_eval(manifest, data_dir, params, options);
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    const std::filesystem::path dir(args.out_dir);
    write_pck_csv(report.pck, (dir / "pck.csv").string());
    write_pck_svg(report.pck, (dir / "pck.svg").string());
  }
  std::cout << "mjpe=" << format_double(report.mjpe) << " evaluated=" << report.evaluated << "\n";
  return 0;
}

struct CalibrateArgs {
  std::string correspondences_path;
  std::string intrinsics_path;
  std::string out;
};

int run_calibrate(const CalibrateArgs& args) {
  const std::vector<Correspondence> correspondences =
      load_correspondences(args.correspondences_path);
  const Intrinsics intrinsics = load_intrinsics(args.intrinsics_path);
  const Extrinsics extrinsics = solve_pnp(correspondences, intrinsics);
  if (!args.out.empty()) save_extrinsics(extrinsics, args.out);
  std::cout << "rms=" << format_double(rms_reprojection_error(correspondences, intrinsics,
                                                              extrinsics))
            << "\n";
  return 0;
}

struct ProjectArgs {
  Intrinsics intrinsics;
  double x = 0.0, y = 0.0, z = 0.0;
  std::string extrinsics_path;
};

int run_project(const ProjectArgs& args) {
  Extrinsics extrinsics;
  if (!args.extrinsics_path.empty()) extrinsics = load_extrinsics(args.extrinsics_path);
  const Keypoint pixel =
      project_point(Eigen::Vector3d(args.x, args.y, args.z), args.intrinsics, extrinsics);
  std::cout << format_double(pixel.x) << ' ' << format_double(pixel.y) << "\n";
  return 0;
}

struct SyncArgs {
  std::string a_path;
  std::string b_path;
  double tolerance_ms = 0.0;
};

int run_sync(const SyncArgs& args) {
  const std::vector<TimedSample> a = load_stream(args.a_path);
  const std::vector<TimedSample> b = load_stream(args.b_path);
  const auto pairs = synchronize_streams(a, b, args.tolerance_ms);
  for (const auto& [i, j] : pairs) {
    std::cout << i << ' ' << j << ' '
              << format_double(b[j].timestamp_ms - a[i].timestamp_ms) << "\n";
  }
  std::cout << "pairs=" << pairs.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage hand pose pipeline: skeleton-based detection and "
               "multi-scale heatmap regression"};
  app.require_subcommand(1);

  GenSynthArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-synth", "Generate a synthetic hand dataset");
  gen->add_option("--n", gen_args.cfg.count, "Number of images")->required();
  gen->add_option("--resolution", gen_args.cfg.resolution, "Square image side (default 128)");
  gen->add_option("--joints", gen_args.cfg.joint_count, "Joint count, 20 or 21 (default 21)");
  gen->add_option("--seed", gen_args.cfg.seed, "RNG seed (default 0)");
  gen->add_option("--absent-fraction", gen_args.cfg.hand_absent_fraction,
                  "Fraction of hand-absent images (default 0)");
  gen->add_option("--noise", gen_args.cfg.background_noise,
                  "Background value-noise amplitude (default 0.2)");
  gen->add_option("--distractors", gen_args.cfg.absent_distractors,
                  "Clutter segments per hand-absent image (default 3)");
  gen->add_option("--thickness", gen_args.cfg.raster.line_thickness,
                  "Bone thickness at resolution 128 (default 3)");
  gen->add_option("--sigma", gen_args.cfg.raster.blob_sigma,
                  "Joint blob sigma at resolution 128 (default 2)");
  gen->add_option("--train-fraction", gen_args.cfg.train_fraction, "Train split (default 0.75)");
  gen->add_option("--val-fraction", gen_args.cfg.val_fraction, "Val split (default 0.10)");
  gen->add_option("--out", gen_args.out, "Output directory")->required();

  RasterizeArgs raster_args;
  CLI::App* rasterize =
      app.add_subcommand("rasterize", "Render one record's ground-truth skeleton image");
  rasterize->add_option("--manifest", raster_args.manifest_path, "Dataset manifest")->required();
  rasterize->add_option("--index", raster_args.index, "Record index (default 0)");
  rasterize->add_option("--thickness", raster_args.raster.line_thickness,
                        "Bone thickness at resolution 128 (default 3)");
  rasterize->add_option("--sigma", raster_args.raster.blob_sigma,
                        "Joint blob sigma at resolution 128 (default 2)");
  rasterize->add_option("--out", raster_args.out, "Output PGM path")->required();

  EncodeArgs encode_args;
  CLI::App* encode = app.add_subcommand("encode", "Encode one joint as a Gaussian heatmap");
  encode->add_option("--x", encode_args.x, "Joint x (column)")->required();
  encode->add_option("--y", encode_args.y, "Joint y (row)")->required();
  encode->add_option("--width", encode_args.width, "Map width (default 128)");
  encode->add_option("--height", encode_args.height, "Map height (default 128)");
  encode->add_option("--sigma", encode_args.spec.sigma, "Blob sigma at resolution 128 (default 2)");
  encode->add_option("--out", encode_args.out, "Output PGM path")->required();

  std::string decode_in;
  CLI::App* decode = app.add_subcommand("decode", "Decode a heatmap PGM to its argmax joint");
  decode->add_option("--in", decode_in, "Input PGM path")->required();

  DetectArgs detect_args;
  CLI::App* detect =
      app.add_subcommand("detect", "Score hand detection over skeleton images of a dataset");
  detect->add_option("--manifest", detect_args.manifest_path, "Dataset manifest")->required();
  detect->add_option("--foreground-threshold", detect_args.thresholds.foreground_threshold,
                     "Binarization threshold (default 0.5)");
  detect->add_option("--presence-count", detect_args.thresholds.presence_count,
                     "Foreground pixels needed to call a hand (default 300)");
  detect->add_option("--salt", detect_args.oracle.salt_probability,
                     "Per-pixel speckle probability (default 0)");
  detect->add_option("--distractors", detect_args.oracle.distractor_segments,
                     "Clutter segments stamped on every skeleton (default 0)");
  detect->add_option("--thickness", detect_args.oracle.raster.line_thickness,
                     "Bone thickness at resolution 128 (default 3)");
  detect->add_option("--sigma", detect_args.oracle.raster.blob_sigma,
                     "Joint blob sigma at resolution 128 (default 2)");
  detect->add_option("--seed", detect_args.oracle.seed, "Corruption seed (default 0)");
  detect->add_option("--sweep", detect_args.sweep, "presence_count values to sweep for AUC")
      ->delimiter(',');
  detect->add_option("--out-dir", detect_args.out_dir, "Directory for detect.csv / sweep.csv");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a pose regressor on dataset crops");
  train_cmd->add_option("--manifest", train_args.manifest_path, "Dataset manifest")->required();
  train_cmd->add_option("--data-dir", train_args.data_dir,
                        "Image base directory (default: the manifest's directory)");
  train_cmd->add_option("--params-out", train_args.params_out, "Checkpoint to write")->required();
  train_cmd
      ->add_option("--variant", train_args.variant,
                   "multi-skeleton | multi | single-scale (default multi-skeleton)")
      ->check(CLI::IsMember({"multi-skeleton", "multi+skeleton", "multi", "single-scale"}));
  train_cmd->add_option("--resolution", train_args.options.input_resolution,
                        "Crop resolution fed to the network (default 64)");
  train_cmd->add_option("--base-channels", train_args.options.base_channels,
                        "Trunk width (default 8)");
  train_cmd->add_option("--epochs", train_args.options.epochs, "Training epochs (default 30)");
  train_cmd->add_option("--batch", train_args.options.batch_size, "Batch size (default 8)");
  train_cmd->add_option("--seed", train_args.options.seed, "Init + shuffle seed (default 0)");
  train_cmd->add_option("--lr", train_args.options.adam.learning_rate,
                        "Base learning rate (default 0.01)");
  train_cmd->add_option("--decay-factor", train_args.options.adam.decay_factor,
                        "Rate decay factor (default 0.9)");
  train_cmd->add_option("--decay-every", train_args.options.adam.decay_every_epochs,
                        "Epochs per decay, 0 disables (default 8)");
  train_cmd->add_option("--margin", train_args.options.crop_margin,
                        "Crop margin around the box (default 0.25)");
  train_cmd->add_option("--thickness", train_args.options.raster.line_thickness,
                        "Conditioning skeleton thickness at resolution 128 (default 3)");
  train_cmd->add_option("--sigma", train_args.options.raster.blob_sigma,
                        "Conditioning blob sigma at resolution 128 (default 2)");
  train_cmd->add_option("--gaussian-sigma", train_args.options.gaussian.sigma,
                        "Target heatmap sigma at resolution 128 (default 2)");
  train_cmd->add_option("--split", train_args.options.split, "Split to train on (default train)");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint: MJPE and PCK curve");
  eval_cmd->add_option("--manifest", eval_args.manifest_path, "Dataset manifest")->required();
  eval_cmd->add_option("--data-dir", eval_args.data_dir,
                       "Image base directory (default: the manifest's directory)");
  eval_cmd->add_option("--params", eval_args.params_path, "Checkpoint to evaluate")->required();
  eval_cmd
      ->add_option("--variant", eval_args.variant,
                   "multi-skeleton | multi | single-scale (default multi-skeleton)")
      ->check(CLI::IsMember({"multi-skeleton", "multi+skeleton", "multi", "single-scale"}));
  eval_cmd->add_option("--margin", eval_args.options.crop_margin,
                       "Crop margin around the box (default 0.25)");
  eval_cmd->add_option("--thickness", eval_args.options.raster.line_thickness,
                       "Conditioning skeleton thickness at resolution 128 (default 3)");
  eval_cmd->add_option("--sigma", eval_args.options.raster.blob_sigma,
                       "Conditioning blob sigma at resolution 128 (default 2)");
  eval_cmd->add_option("--split", eval_args.options.split, "Split to evaluate (default test)");
  eval_cmd->add_option("--pck-thresholds", eval_args.options.pck_thresholds,
                       "PCK thresholds (default 0.02..0.50)")
      ->delimiter(',');
  eval_cmd->add_option("--out-dir", eval_args.out_dir, "Directory for pck.csv / pck.svg");

  CalibrateArgs calib_args;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Solve camera extrinsics from 3D-2D correspondences");
  calibrate->add_option("--correspondences", calib_args.correspondences_path, "X Y Z u v lines")
      ->required();
  calibrate->add_option("--intrinsics", calib_args.intrinsics_path, "fx fy cx cy file")
      ->required();
  calibrate->add_option("--out", calib_args.out, "Extrinsics file to write");

  ProjectArgs project_args;
  CLI::App* project = app.add_subcommand("project", "Project a 3D point to pixels");
  project->add_option("--fx", project_args.intrinsics.fx, "Focal length x")->required();
  project->add_option("--fy", project_args.intrinsics.fy, "Focal length y")->required();
  project->add_option("--cx", project_args.intrinsics.cx, "Principal point x")->required();
  project->add_option("--cy", project_args.intrinsics.cy, "Principal point y")->required();
  project->add_option("--x", project_args.x, "Point X")->required();
  project->add_option("--y", project_args.y, "Point Y")->required();
  project->add_option("--z", project_args.z, "Point Z")->required();
  project->add_option("--extrinsics", project_args.extrinsics_path,
                      "Extrinsics file (default: identity)");

  SyncArgs sync_args;
  CLI::App* sync = app.add_subcommand("sync", "Pair two timestamp streams within a tolerance");
  sync->add_option("--a", sync_args.a_path, "First stream file")->required();
  sync->add_option("--b", sync_args.b_path, "Second stream file")->required();
  sync->add_option("--tolerance", sync_args.tolerance_ms, "Pairing tolerance in ms")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return run_gen_synth(gen_args);
    if (rasterize->parsed()) return run_rasterize(raster_args);
    if (encode->parsed()) return run_encode(encode_args);
    if (decode->parsed()) return run_decode(decode_in);
    if (detect->parsed()) return run_detect_cmd(detect_args);
    if (train_cmd->parsed()) return run_train(train_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (calibrate->parsed()) return run_calibrate(calib_args);
    if (project->parsed()) return run_project(project_args);
    if (sync->parsed()) return run_sync(sync_args);
  } catch (const handpose::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand selected\n";
  return 2;
}
