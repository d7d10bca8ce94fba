// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
//
// Command line front end: quantizes learned image compression models to
// mixed per-layer bit-widths, searches the tolerance for a target model
// size, fine-tunes with quantization-aware training, and evaluates
// rate-distortion performance.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "licq/bit_search.hpp"
#include "licq/checkpoint.hpp"
#include "licq/config.hpp"
#include "licq/dataset.hpp"
#include "licq/metrics.hpp"
#include "licq/model_size.hpp"
#include "licq/report.hpp"
#include "licq/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace licq;

namespace {

// Exit codes: distinct classes so scripts can react.
constexpr int kOk = 0;
constexpr int kError = 1;           // unexpected failure
constexpr int kBadInput = 2;        // missing/invalid inputs or config
constexpr int kNoConvergence = 3;   // search ended outside the target band
constexpr int kDivergence = 4;      // training blew up

struct BadInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Accumulates a run manifest; every command writes one into its run
// directory so any artifact can be traced back to its full configuration.
struct RunContext {
  fs::path out;
  json manifest;

  RunContext(const std::string& out_dir, const std::string& command, const Config& cfg) {
    out = fs::path(out_dir);
    fs::create_directories(out);
    manifest["command"] = command;
    manifest["config"] = cfg.values();
    manifest["outputs"] = json::array();
    manifest["status"] = "running";
  }

  std::string file(const std::string& name) {
    manifest["outputs"].push_back(name);
    return (out / name).string();
  }

  void finish(int code) {
    manifest["status"] = code == kOk ? "ok" : "failed";
    manifest["exit_code"] = code;
    std::ofstream os(out / "manifest.json");
    os << manifest.dump(2) << "\n";
  }
};

WidthConfig widths_from_config(const Config& cfg) {
  WidthConfig w;
  w.main_channels = cfg.get_int("main_channels", 32);
  w.latent_channels = cfg.get_int("latent_channels", 32);
  w.hyper_channels = cfg.get_int("hyper_channels", 16);
  return w;
}

TrainConfig train_config_from(const Config& cfg, const TrainConfig& defaults) {
  TrainConfig t = defaults;
  t.epochs = cfg.get_int("epochs", t.epochs);
  t.batch_size = cfg.get_int("batch_size", t.batch_size);
  t.lr_weights = cfg.get_double("lr_weights", t.lr_weights);
  t.lr_quant = cfg.get_double("lr_quant", t.lr_quant);
  t.lambda = cfg.get_double("lambda", 0.0);
  t.seed = cfg.get_u64("seed", 0);
  t.crop_size = cfg.get_int("crop_size", 64);
  const std::string sched = cfg.get_string("schedule", "");
  if (!sched.empty()) {
    if (sched == "cosine")
      t.schedule = LrSchedule::kCosine;
    else if (sched == "constant")
      t.schedule = LrSchedule::kConstant;
    else
      throw BadInput("unknown schedule: " + sched);
  }
  t.verbose = cfg.get_bool("verbose", true);
  return t;
}

void write_loss_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::ostringstream os;
  os.precision(12);
  os << "epoch,mean_loss,mean_rate_bpp,mean_mse\n";
  for (const auto& e : history)
    os << e.epoch << "," << e.mean_loss << "," << e.mean_rate_bpp << "," << e.mean_mse << "\n";
  write_text_file(path, os.str());
}

// --- zeta cache persistence --------------------------------------------

json zeta_cache_to_json(uint64_t model_hash, uint64_t calib_hash,
                        const std::vector<SensitivityRecord>& records) {
  json j;
  j["model_hash"] = model_hash;
  j["calib_hash"] = calib_hash;
  json rows = json::array();
  for (const auto& r : records)
    rows.push_back({{"layer", r.layer_index},
                    {"bits", r.bits},
                    {"rd_full", r.rd_full},
                    {"rd_quant", r.rd_quant},
                    {"zeta", r.zeta}});
  j["records"] = std::move(rows);
  return j;
}

std::vector<SensitivityRecord> load_zeta_cache(const std::string& path, uint64_t model_hash,
                                               uint64_t calib_hash) {
  std::ifstream is(path);
  if (!is) return {};
  json j;
  try {
    is >> j;
    if (j.value("model_hash", 0ull) != model_hash || j.value("calib_hash", 0ull) != calib_hash)
      return {};
    std::vector<SensitivityRecord> out;
    for (const auto& row : j.at("records")) {
      SensitivityRecord r;
      r.layer_index = row.at("layer").get<int>();
      r.bits = row.at("bits").get<int>();
      r.rd_full = row.at("rd_full").get<double>();
      r.rd_quant = row.at("rd_quant").get<double>();
      r.zeta = row.at("zeta").get<double>();
      out.push_back(r);
    }
    return out;
  } catch (...) {
    std::fprintf(stderr, "warning: ignoring unreadable zeta cache %s\n", path.c_str());
    return {};
  }
}

struct CalibratedAnalyzer {
  CalibSet calib;
  Tensor batch;
  std::unique_ptr<SensitivityAnalyzer> analyzer;
  uint64_t model_hash = 0;
};

CalibratedAnalyzer make_analyzer(const LicModel& model, const std::string& checkpoint_path,
                                 const std::string& calib_dir, const Config& cfg,
                                 const std::string& cache_path) {
  CalibratedAnalyzer out;
  out.calib = select_calibration(resolve_data_path(calib_dir), cfg.get_int("calib_count", 16),
                                 cfg.get_u64("calib_seed", 0));
  out.batch = calibration_batch(out.calib, cfg.get_int("calib_crop", 64));
  out.analyzer = std::make_unique<SensitivityAnalyzer>(model, out.batch);
  out.model_hash = fnv1a_file(checkpoint_path);
  if (!cache_path.empty() && !cfg.get_bool("fresh_zeta", false)) {
    auto cached = load_zeta_cache(cache_path, out.model_hash, out.analyzer->calib_hash());
    if (!cached.empty()) {
      out.analyzer->preload(cached);
      std::fprintf(stderr, "loaded %zu cached sensitivity records\n", cached.size());
    }
  }
  return out;
}

void save_zeta_cache(const std::string& path, const CalibratedAnalyzer& ca) {
  if (path.empty()) return;
  std::ofstream os(path);
  os << zeta_cache_to_json(ca.model_hash, ca.analyzer->calib_hash(), ca.analyzer->table()).dump(2)
     << "\n";
}

// --- subcommands ----------------------------------------------------------

int cmd_make_dataset(const Config& cfg, const std::string& out_dir) {
  RunContext run(out_dir, "make-dataset", cfg);
  const int count = cfg.get_int("count", 64);
  auto paths = generate_toy_dataset(run.out.string(), count, cfg.get_u64("seed", 0),
                                    cfg.get_int("min_size", 96), cfg.get_int("max_size", 160));
  run.manifest["images"] = paths.size();
  std::printf("wrote %zu toy images to %s\n", paths.size(), run.out.string().c_str());
  run.finish(kOk);
  return kOk;
}

int train_one_quality(const Config& cfg, RunContext& run, int quality,
                      const std::string& data_dir, bool resume) {
  const std::string ckpt_name = "baseline_q" + std::to_string(quality) + ".ckpt";
  const std::string ckpt_path = (run.out / ckpt_name).string();

  TrainConfig tc = train_config_from(cfg, baseline_defaults());
  LicModel model;
  int done_epochs = 0;
  std::optional<AdamOptimizer> opt;

  if (resume && fs::exists(ckpt_path)) {
    LoadedCheckpoint lc = load_checkpoint(ckpt_path);
    model = std::move(lc.model);
    if (const std::string* e = lc.raw.find_meta("train.epochs_completed"))
      done_epochs = std::stoi(*e);
    opt.emplace(std::vector<AdamOptimizer::Group>{{model.parameters(), tc.lr_weights}});
    std::vector<std::pair<std::string, Tensor>> opt_state;
    for (const auto& [name, t] : lc.raw.tensors)
      if (name.rfind("opt.", 0) == 0) opt_state.emplace_back(name, t);
    if (!opt_state.empty()) opt->load_state(opt_state);
    std::printf("resuming q%d from epoch %d\n", quality, done_epochs);
  } else {
    model = build_model(parse_variant(cfg.get_string("variant", "mean-scale-hyperprior")),
                        widths_from_config(cfg), quality, cfg.get_u64("seed", 0));
    opt.emplace(std::vector<AdamOptimizer::Group>{{model.parameters(), tc.lr_weights}});
  }

  auto images = load_images(list_image_files(resolve_data_path(data_dir)));
  if (images.empty()) throw BadInput("no training images in " + data_dir);

  const int total_epochs = tc.epochs;
  tc.epochs = std::max(0, total_epochs - done_epochs);
  tc.epoch_offset = done_epochs;
  TrainResult res = train_baseline(model, images, tc, &*opt);

  std::vector<std::pair<std::string, std::string>> meta = {
      {"train.epochs_completed",
       std::to_string(done_epochs + static_cast<int>(res.history.size()))}};
  for (const auto& kv : cfg.as_meta()) meta.push_back(kv);
  save_checkpoint(ckpt_path, model, std::nullopt, meta, opt->state_tensors());
  run.manifest["outputs"].push_back(ckpt_name);
  write_loss_csv(run.file("loss_q" + std::to_string(quality) + ".csv"), res.history);

  if (res.diverged) {
    std::fprintf(stderr, "training diverged at q%d; last finite checkpoint retained\n", quality);
    return kDivergence;
  }
  return kOk;
}

int cmd_train_baseline(const Config& cfg, const std::string& out_dir, const std::string& data_dir,
                       int quality, bool all_qualities, bool resume) {
  RunContext run(out_dir, "train-baseline", cfg);
  int rc = kOk;
  if (all_qualities) {
    for (int q = 0; q < 6 && rc == kOk; ++q) rc = train_one_quality(cfg, run, q, data_dir, resume);
  } else {
    rc = train_one_quality(cfg, run, quality, data_dir, resume);
  }
  run.finish(rc);
  return rc;
}

int cmd_assign(const Config& cfg, const std::string& out_dir, const std::string& checkpoint,
               const std::string& calib_dir) {
  RunContext run(out_dir, "assign", cfg);
  LoadedCheckpoint lc = load_checkpoint(resolve_data_path(checkpoint));
  const std::string cache_path = (run.out / "zeta_cache.json").string();
  CalibratedAnalyzer ca = make_analyzer(lc.model, resolve_data_path(checkpoint), calib_dir, cfg,
                                        cache_path);

  BitAssignment a = assign_bits(*ca.analyzer, cfg.get_double("beta", 0.01),
                                cfg.get_int("bmax", 8), cfg.get_int("jobs", 1));
  save_zeta_cache(cache_path, ca);
  run.manifest["outputs"].push_back("zeta_cache.json");

  json aj = json::parse(assignment_to_json(a));
  aj["quality_index"] = lc.model.quality_index;
  write_text_file(run.file("assignment.json"), aj.dump(2) + "\n");
  write_zeta_csv(run.file("zeta.csv"), ca.analyzer->table());

  SizeReport size = model_size_report(lc.model, a);
  run.manifest["compression_ratio"] = size.cr_vs_8bit;
  run.manifest["model_size_mb"] = size.total_mb;
  std::printf("assignment (beta=%g):", a.beta_used);
  for (int b : a.bits) std::printf(" %d", b);
  std::printf("\nsize %.4f MB, CR vs 8-bit %.4f\n", size.total_mb, size.cr_vs_8bit);
  run.finish(kOk);
  return kOk;
}

int run_qat(const Config& cfg, RunContext& run, const LicModel& model, const BitAssignment& a,
            const std::string& data_dir, const std::string& out_name) {
  QuantizedModel qm = attach_quantizers(model, a, cfg.get_int("activation_bits", 8), std::nullopt,
                                        cfg.get_double("leak", 0.01));
  auto images = load_images(list_image_files(resolve_data_path(data_dir)));
  if (images.empty()) throw BadInput("no training images in " + data_dir);

  TrainConfig tc = train_config_from(cfg, qat_defaults());
  TrainResult res = qat_finetune(qm, images, tc);
  write_loss_csv(run.file(out_name + "_loss.csv"), res.history);
  save_checkpoint((run.out / (out_name + ".ckpt")).string(), qm, cfg.as_meta());
  run.manifest["outputs"].push_back(out_name + ".ckpt");
  if (res.diverged) {
    std::fprintf(stderr, "qat diverged; last finite checkpoint retained\n");
    return kDivergence;
  }
  return kOk;
}

int cmd_search(const Config& cfg, const std::string& out_dir, const std::string& checkpoint,
               const std::string& calib_dir, const std::string& mode, bool then_qat,
               const std::string& data_dir) {
  RunContext run(out_dir, "search", cfg);
  LoadedCheckpoint lc = load_checkpoint(resolve_data_path(checkpoint));
  const std::string cache_path = (run.out / "zeta_cache.json").string();
  CalibratedAnalyzer ca = make_analyzer(lc.model, resolve_data_path(checkpoint), calib_dir, cfg,
                                        cache_path);

  SearchOptions opts;
  opts.cr_target = cfg.get_double("cr_target", 1.0);
  opts.beta_init = cfg.get_double("beta_init", 0.01);
  opts.step = cfg.get_double("step", 0.01);
  opts.max_iterations = cfg.get_int("max_iterations", mode == "exhaustive" ? 200000 : 100);
  const int b_max = cfg.get_int("bmax", 8);
  const int jobs = cfg.get_int("jobs", 1);

  SearchResult res;
  if (mode == "adaptive")
    res = adaptive_search(*ca.analyzer, lc.model, opts, b_max, jobs);
  else if (mode == "exhaustive")
    res = exhaustive_search(*ca.analyzer, lc.model, opts, b_max, jobs);
  else
    throw BadInput("unknown search mode: " + mode);
  save_zeta_cache(cache_path, ca);
  run.manifest["outputs"].push_back("zeta_cache.json");

  std::printf("iteration       beta alpha_beta         cr\n");
  for (const auto& e : res.state.history)
    std::printf("%9d %10.5f %10.5f %10.5f\n", e.iteration, e.beta, e.alpha_beta, e.cr);
  std::printf("%s after %d iterations (cr %.4f, target %.4f)\n",
              res.converged ? "converged" : "NOT converged", res.state.iteration, res.state.cr,
              opts.cr_target);

  write_trace_csv(run.file("trace.csv"), res.state.history);
  write_text_file(run.file("trace.json"), trace_to_json(res) + "\n");
  json aj = json::parse(assignment_to_json(res.assignment));
  aj["quality_index"] = lc.model.quality_index;
  write_text_file(run.file("assignment.json"), aj.dump(2) + "\n");
  write_zeta_csv(run.file("zeta.csv"), ca.analyzer->table());
  run.manifest["converged"] = res.converged;
  run.manifest["iterations"] = res.state.iteration;
  run.manifest["achieved_cr"] = res.state.cr;

  int rc = res.converged ? kOk : kNoConvergence;
  if (res.converged && then_qat) rc = run_qat(cfg, run, lc.model, res.assignment, data_dir, "qat");
  run.finish(rc);
  return rc;
}

int cmd_qat(const Config& cfg, const std::string& out_dir, const std::string& checkpoint,
            const std::string& assignment_path, const std::string& data_dir) {
  RunContext run(out_dir, "qat", cfg);
  LoadedCheckpoint lc = load_checkpoint(resolve_data_path(checkpoint));
  BitAssignment a = assignment_from_json_file(resolve_data_path(assignment_path));
  const int rc = run_qat(cfg, run, lc.model, a, data_dir, "qat");
  run.finish(rc);
  return rc;
}

struct CurveSpec {
  std::vector<std::string> checkpoints;
  std::string label;
};

RDCurve eval_curve(const CurveSpec& spec, const std::vector<Tensor>& images, int jobs,
                   std::vector<double>* sizes_mb) {
  std::vector<RDPoint> points;
  for (const auto& path : spec.checkpoints) {
    LoadedCheckpoint lc = load_checkpoint(resolve_data_path(path));
    EvalSummary s;
    if (lc.quant) {
      QuantizedModel qm = lc.to_quantized();
      s = evaluate_model(qm, images, jobs);
      if (sizes_mb) sizes_mb->push_back(model_size_report(lc.model, lc.quant->assignment).total_mb);
    } else {
      s = evaluate_model(lc.model, images, jobs);
      if (sizes_mb) {
        // float32 accounting for unquantized baselines
        uint64_t params = 0;
        for (const auto& p : lc.model.parameters())
          params += static_cast<uint64_t>(p->value.size());
        sizes_mb->push_back(static_cast<double>(params) * 32.0 / (8.0 * 1048576.0));
      }
    }
    points.push_back({s.mean_bpp, s.mean_psnr_db, lc.model.quality_index, lc.model.lambda});
  }
  return RDCurve::from_points(std::move(points), spec.label);
}

int cmd_eval(const Config& cfg, const std::string& out_dir,
             const std::vector<std::string>& checkpoints, const std::string& image_dir,
             const std::vector<std::string>& reference,
             const std::vector<std::string>& assignments) {
  RunContext run(out_dir, "eval", cfg);
  const int jobs = cfg.get_int("jobs", 1);
  const BdFit fit = cfg.get_string("bd_fit", "cubic") == "pchip" ? BdFit::kPchip : BdFit::kCubic;

  int skipped = 0;
  auto images = load_images(list_image_files(resolve_data_path(image_dir)), &skipped);
  if (images.empty()) throw BadInput("no decodable images in " + image_dir);
  run.manifest["images"] = images.size();
  run.manifest["skipped"] = skipped;

  std::vector<RDCurve> curves;
  std::vector<BdSummaryEntry> summary;

  if (!checkpoints.empty()) {
    std::vector<double> sizes;
    curves.push_back(
        eval_curve({checkpoints, cfg.get_string("label", "test")}, images, jobs, &sizes));
    double mean_size = 0.0;
    for (double s : sizes) mean_size += s;
    mean_size /= static_cast<double>(sizes.size());

    if (!reference.empty()) {
      std::vector<double> ref_sizes;
      curves.push_back(eval_curve({reference, cfg.get_string("reference_label", "reference")},
                                  images, jobs, &ref_sizes));
      const double bd = bd_rate(curves.back(), curves.front(), fit);
      summary.push_back({curves.front().label, image_dir, bd, mean_size});
      double ref_mean = 0.0;
      for (double s : ref_sizes) ref_mean += s;
      summary.push_back({curves.back().label, image_dir, 0.0,
                         ref_mean / static_cast<double>(ref_sizes.size())});
      std::printf("bd-rate of %s vs %s: %+.4f%%\n", curves.front().label.c_str(),
                  curves.back().label.c_str(), bd);
      run.manifest["bd_rate_percent"] = bd;
    }
    write_rd_csv(run.file("rd_points.csv"), curves);
    write_svg_rd_curves(run.file("rd_curves.svg"), curves);
    if (!summary.empty())
      write_text_file(run.file("bd_summary.json"),
                      bd_summary_to_json(summary, cfg.to_string()) + "\n");
    for (const auto& c : curves)
      for (const auto& p : c.points)
        std::printf("%-12s q%d  %.4f bpp  %.3f dB\n", c.label.c_str(), p.quality_index, p.bpp,
                    p.psnr_db);
  }

  if (!assignments.empty()) {
    if (checkpoints.empty())
      throw BadInput("--assignments requires at least one checkpoint for the architecture");
    std::map<int, BitAssignment> byq;
    int fallback_q = 0;
    for (const auto& path : assignments) {
      std::ifstream is(resolve_data_path(path));
      if (!is) throw BadInput("cannot open assignment " + path);
      json j;
      is >> j;
      const int q = j.value("quality_index", fallback_q);
      byq[q] = assignment_from_json_file(resolve_data_path(path));
      ++fallback_q;
    }
    const auto layers =
        list_quantizable_layers(load_checkpoint(resolve_data_path(checkpoints[0])).model);
    BitDistributionReport rep = bit_distribution_report(byq, layers);
    std::printf("%s", rep.to_table().c_str());
    write_text_file(run.file("bit_distribution.txt"), rep.to_table());
    write_svg_bit_distribution(run.file("bit_distribution.svg"), rep);
    run.manifest["mean_main_path_bits"] = rep.mean_main_path_bits;
    run.manifest["mean_hyper_path_bits"] = rep.mean_hyper_path_bits;
    run.manifest["main_path_ge_hyper_path"] = rep.main_path_ge_hyper_path;
  }

  run.finish(kOk);
  return kOk;
}

// Applies `--set key=value` style overrides after the config file.
void apply_overrides(Config& cfg, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) throw BadInput("--set expects key=value, got: " + kv);
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixed-precision quantization toolkit for learned image compression"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "runs/out", data_dir, checkpoint, calib_dir;
  std::string assignment_path, image_dir, mode = "adaptive";
  std::vector<std::string> checkpoints, reference, assignments, overrides;
  int quality = 0;
  bool all_qualities = false, resume = false, then_qat = false;
  double beta_flag = -1.0, cr_target_flag = -1.0, beta_init_flag = -1.0;
  double lrw_flag = -1.0, lrq_flag = -1.0;
  int bmax_flag = -1, jobs_flag = -1, epochs_flag = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value configuration file");
    sub->add_option("--out", out_dir, "run directory for artifacts");
    sub->add_option("--set", overrides, "override a config key (key=value), repeatable");
  };

  CLI::App* mk = app.add_subcommand("make-dataset", "generate a synthetic toy image set");
  add_common(mk);

  CLI::App* tb = app.add_subcommand("train-baseline", "train a full-precision baseline");
  add_common(tb);
  tb->add_option("--data", data_dir, "training image directory")->required();
  tb->add_option("--quality", quality, "quality level in [0,5]");
  tb->add_flag("--all-qualities", all_qualities, "train every quality level");
  tb->add_flag("--resume", resume, "continue from the saved epoch");
  tb->add_option("--epochs", epochs_flag, "total training epochs");

  CLI::App* as = app.add_subcommand("assign", "mixed-precision bit assignment at a tolerance");
  add_common(as);
  as->add_option("--checkpoint", checkpoint, "baseline checkpoint")->required();
  as->add_option("--calib-dir", calib_dir, "calibration image directory")->required();
  as->add_option("--beta", beta_flag, "tolerance on the rd-loss change, percent");
  as->add_option("--bmax", bmax_flag, "largest candidate bit-width");
  as->add_option("--jobs", jobs_flag, "parallel sensitivity evaluations");

  CLI::App* se = app.add_subcommand("search", "search the tolerance for a target model size");
  add_common(se);
  se->add_option("--checkpoint", checkpoint, "baseline checkpoint")->required();
  se->add_option("--calib-dir", calib_dir, "calibration image directory")->required();
  se->add_option("--cr-target", cr_target_flag, "target compression ratio vs all-8-bit")
      ->required();
  se->add_option("--beta-init", beta_init_flag, "initial tolerance");
  se->add_option("--mode", mode, "adaptive | exhaustive");
  se->add_option("--bmax", bmax_flag, "largest candidate bit-width");
  se->add_option("--jobs", jobs_flag, "parallel sensitivity evaluations");
  se->add_flag("--then-qat", then_qat, "fine-tune the found assignment");
  se->add_option("--data", data_dir, "training images for --then-qat");
  se->add_option("--epochs", epochs_flag, "fine-tuning epochs for --then-qat");

  CLI::App* qa = app.add_subcommand("qat", "quantization-aware fine-tuning of an assignment");
  add_common(qa);
  qa->add_option("--checkpoint", checkpoint, "baseline checkpoint")->required();
  qa->add_option("--assignment", assignment_path, "bit-assignment json")->required();
  qa->add_option("--data", data_dir, "training image directory")->required();
  qa->add_option("--epochs", epochs_flag, "fine-tuning epochs");
  qa->add_option("--lr-weights", lrw_flag, "model parameter learning rate");
  qa->add_option("--lr-quant", lrq_flag, "quantizer parameter learning rate");

  CLI::App* ev = app.add_subcommand("eval", "rate-distortion evaluation and reports");
  add_common(ev);
  ev->add_option("--checkpoints", checkpoints, "checkpoints forming the test curve");
  ev->add_option("--image-dir", image_dir, "evaluation image directory")->required();
  ev->add_option("--reference", reference, "checkpoints forming the reference curve");
  ev->add_option("--assignments", assignments, "assignment jsons for the bit-width report");
  ev->add_option("--jobs", jobs_flag, "parallel image evaluations");

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg;
    if (!config_path.empty()) cfg = Config::from_file(config_path);
    apply_overrides(cfg, overrides);
    // explicit flags override config-file values
    if (beta_flag >= 0) cfg.set("beta", std::to_string(beta_flag));
    if (cr_target_flag >= 0) cfg.set("cr_target", std::to_string(cr_target_flag));
    if (beta_init_flag >= 0) cfg.set("beta_init", std::to_string(beta_init_flag));
    if (bmax_flag >= 0) cfg.set("bmax", std::to_string(bmax_flag));
    if (jobs_flag >= 0) cfg.set("jobs", std::to_string(jobs_flag));
    if (epochs_flag >= 0) cfg.set("epochs", std::to_string(epochs_flag));
    if (lrw_flag >= 0) cfg.set("lr_weights", std::to_string(lrw_flag));
    if (lrq_flag >= 0) cfg.set("lr_quant", std::to_string(lrq_flag));

    if (mk->parsed()) return cmd_make_dataset(cfg, out_dir);
    if (tb->parsed())
      return cmd_train_baseline(cfg, out_dir, data_dir, quality, all_qualities, resume);
    if (as->parsed()) return cmd_assign(cfg, out_dir, checkpoint, calib_dir);
    if (se->parsed())
      return cmd_search(cfg, out_dir, checkpoint, calib_dir, mode, then_qat, data_dir);
    if (qa->parsed()) return cmd_qat(cfg, out_dir, checkpoint, assignment_path, data_dir);
    if (ev->parsed()) return cmd_eval(cfg, out_dir, checkpoints, image_dir, reference, assignments);
    return kBadInput;
  } catch (const BadInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kError;
  }
}
