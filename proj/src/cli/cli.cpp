#include "surmr/cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <random>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "surmr/core/quality.hpp"
#include "surmr/error.hpp"
#include "surmr/io/checkpoint.hpp"
#include "surmr/io/csv.hpp"
#include "surmr/io/formats.hpp"
#include "surmr/io/image.hpp"
#include "surmr/labelgen/iqa.hpp"
#include "surmr/labelgen/labelgen.hpp"
#include "surmr/train/ablation.hpp"
#include "surmr/train/gradcheck.hpp"
#include "surmr/train/split.hpp"
#include "surmr/train/trainer.hpp"

namespace surmr::cli {

using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json load_run_config(const std::string& flag_path) {
  std::string path = flag_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnv)) path = env;
  }
  if (path.empty()) return json::object();
  try {
    auto j = json::parse(io::read_text_file(path));
    if (!j.is_object()) throw Error("run config '" + path + "' must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error("run config '" + path + "': invalid JSON: " + e.what());
  }
}

json section(const json& rc, const std::string& key) {
  if (!rc.contains(key)) return json::object();
  if (!rc.at(key).is_object()) throw Error("run config key '" + key + "' must be an object");
  return rc.at(key);
}

// "preset": "tiny" starts from the desk-scale configuration; other keys
// override individual fields.
model::NetworkConfig resolve_network(const json& rc) {
  json patch = section(rc, "network");
  const std::string preset = patch.value("preset", std::string("default"));
  model::NetworkConfig base;
  if (preset == "tiny") {
    base = model::tiny_config();
  } else if (preset != "default") {
    throw Error("unknown network preset '" + preset + "' (expected default or tiny)");
  }
  patch.erase("preset");
  json j = base;
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (it->is_object() && j.contains(it.key())) {
      j[it.key()].merge_patch(*it);
    } else {
      j[it.key()] = *it;
    }
  }
  return j.get<model::NetworkConfig>();
}

train::TrainConfig resolve_train(const json& rc, const std::string& phase) {
  json j = train::TrainConfig{};
  j.merge_patch(section(rc, "train"));
  if (!phase.empty()) j.merge_patch(section(rc, phase));
  return j.get<train::TrainConfig>();
}

void echo(std::ostream& out, const std::string& command, const json& config) {
  out << json{{"command", command}, {"config", config}}.dump(2) << "\n";
}

// Flags shared by the training commands; each overrides the run config only
// when given.
struct TrainFlags {
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string precision = "double";
  std::size_t steps = 0, epochs = 0, batch = 0, patience = 0;
  double lr = 0.0;
  bool no_augment = false;
  std::string variant;
  CLI::Option *workers_opt = nullptr, *precision_opt = nullptr, *steps_opt = nullptr, *epochs_opt = nullptr,
              *batch_opt = nullptr, *lr_opt = nullptr, *patience_opt = nullptr;

  void add(CLI::App* app, bool with_variant = true) {
    app->add_option("--seed", seed, "Run seed (initialization, shuffling, augmentation)")->required();
    workers_opt = app->add_option("--workers", workers, "Kernel threads; 0 = single-threaded reproducible mode");
    precision_opt = app->add_option("--precision", precision, "Arithmetic precision (double)");
    steps_opt = app->add_option("--steps", steps, "Maximum optimizer steps");
    epochs_opt = app->add_option("--epochs", epochs, "Maximum epochs");
    batch_opt = app->add_option("--batch-size", batch, "Items per step");
    lr_opt = app->add_option("--lr", lr, "Learning rate");
    patience_opt = app->add_option("--patience", patience, "Early-stop patience in epochs (0 disables)");
    app->add_flag("--no-augment", no_augment, "Disable random flips");
    if (with_variant) app->add_option("--variant", variant, "Architecture variant");
  }

  void apply(train::TrainConfig& c) const {
    c.seed = seed;
    if (workers_opt->count()) c.workers = workers;
    if (precision_opt->count()) c.precision = precision;
    if (steps_opt->count()) c.max_steps = steps;
    if (epochs_opt->count()) c.max_epochs = epochs;
    if (batch_opt->count()) c.batch_size = batch;
    if (lr_opt->count()) c.learning_rate = lr;
    if (patience_opt->count()) c.patience = patience;
    if (no_augment) c.hflip = c.vflip = false;
  }
};

struct Splits {
  train::Dataset train, val, test;
};

Splits build_splits(const io::Manifest& manifest, const std::string& split_file,
                    const std::optional<io::LabelMap>& sur, const std::optional<io::LabelMap>& smr,
                    const model::BackboneConfig& config) {
  Splits s;
  if (split_file.empty()) {
    s.train = train::load_dataset(manifest, {}, sur, smr, config);
    return s;
  }
  const auto parts = train::split_from_assignment(io::read_split_file(split_file));
  std::vector<std::string> all = parts.train;
  all.insert(all.end(), parts.val.begin(), parts.val.end());
  all.insert(all.end(), parts.test.begin(), parts.test.end());
  const auto ds = train::load_dataset(manifest, all, sur, smr, config);
  s.train = ds.subset(parts.train);
  s.val = ds.subset(parts.val);
  s.test = ds.subset(parts.test);
  return s;
}

std::optional<io::LabelMap> maybe_labels(const std::string& path, const std::vector<std::string>& columns) {
  if (path.empty()) return std::nullopt;
  return io::read_labels(path, columns);
}

const std::vector<std::string> kSurColumns{"sur", "ratio", "sur_hat"};
const std::vector<std::string> kProxyColumns{"sur_hat", "sur", "ratio"};
const std::vector<std::string> kSmrColumns{"smr", "ratio"};

json result_json(const train::TrainResult& r) {
  json epochs = json::array();
  for (const auto& e : r.epoch_log) {
    epochs.push_back({{"epoch", e.epoch},
                      {"step", e.step},
                      {"train_loss", e.train_loss},
                      {"val_score", e.val_score ? json(*e.val_score) : json()},
                      {"improved", e.improved}});
  }
  return {{"steps", r.steps},
          {"best_step", r.best_step},
          {"best_val", r.best_val ? json(*r.best_val) : json()},
          {"early_stopped", r.early_stopped},
          {"epochs", epochs}};
}

// Shared body of pretrain and finetune.
struct TrainCommand {
  std::string manifest, sur_labels, smr_labels, split_file, init, out, log, report, config_path;
  bool no_sur = false, no_smr = false, freeze = false;
  TrainFlags flags;
};

int run_training(const TrainCommand& c, const std::string& phase, std::ostream& out) {
  const json rc = load_run_config(c.config_path);
  auto tcfg = resolve_train(rc, phase);
  c.flags.apply(tcfg);
  if (c.no_sur) tcfg.loss.sur_mask = false;
  if (c.no_smr) tcfg.loss.smr_mask = false;
  if (c.freeze) tcfg.freeze_backbone = true;
  tcfg.validate();

  std::optional<io::Checkpoint> init;
  if (!c.init.empty()) init = io::load_checkpoint(c.init);
  model::NetworkConfig ncfg = init ? init->network.config() : resolve_network(rc);
  if (!c.flags.variant.empty()) {
    ncfg.variant = model::parse_variant(c.flags.variant);
  } else if (phase == "finetune" && ncfg.variant == model::Variant::pretrain_extractor) {
    // The extractor only donates its backbone.
    ncfg.variant = model::Variant::full;
  }
  ncfg.validate();

  const json resolved{{"phase", phase},
                      {"network", ncfg},
                      {"train", tcfg},
                      {"inputs",
                       {{"manifest", c.manifest},
                        {"sur_labels", c.sur_labels},
                        {"smr_labels", c.smr_labels},
                        {"split_file", c.split_file},
                        {"init", c.init}}}};
  echo(out, phase, resolved);
  for (const auto& w : ncfg.warnings()) out << "warning: " << w << "\n";

  const auto manifest = io::read_manifest(c.manifest);
  const auto sur = maybe_labels(c.sur_labels, phase == "pretrain" ? kProxyColumns : kSurColumns);
  const auto smr = maybe_labels(c.smr_labels, kSmrColumns);
  if (tcfg.loss.sur_mask && !sur) throw Error("SUR loss enabled but no SUR labels given");
  if (tcfg.loss.smr_mask && !smr) throw Error("SMR loss enabled but no SMR labels given");
  const auto data = build_splits(manifest, c.split_file, sur, smr, ncfg.backbone);

  model::Network net(ncfg, tcfg.seed);
  const auto result = init ? train::finetune(net, &init->network, data.train, data.val, tcfg)
                           : train::train_model(net, data.train, data.val, tcfg);

  io::CheckpointMeta meta;
  meta.step = result.steps;
  meta.seed = tcfg.seed;
  meta.phase = phase;
  meta.extra = {{"train", tcfg}, {"best_step", result.best_step}};
  io::save_checkpoint(c.out, net, meta);
  if (!c.log.empty()) io::write_text_file(c.log, train::format_step_log(result.step_log));

  train::MetricsReport report;
  report.variant = std::string(model::to_string(ncfg.variant));
  report.dataset = manifest.base_dir.filename().string();
  report.seed = tcfg.seed;
  report.steps = result.steps;
  report.config = resolved;
  report.config_hash = train::config_hash(resolved);
  if (!data.train.empty()) report.splits.push_back(train::evaluate(net, data.train, "train"));
  if (!data.val.empty()) report.splits.push_back(train::evaluate(net, data.val, "val"));
  for (const auto& s : report.splits) {
    out << s.split << ": mae_sur=" << (s.mae_sur ? io::format_real(*s.mae_sur) : "-")
        << " mae_smr=" << (s.mae_smr ? io::format_real(*s.mae_smr) : "-") << "\n";
  }
  if (!c.report.empty()) {
    json j = train::report_to_json(report, false);
    j["training"] = result_json(result);
    io::write_text_file(c.report, j.dump(2) + "\n");
  }
  out << "wrote checkpoint " << c.out << " after " << result.steps << " steps\n";
  return 0;
}

std::string predictions_csv(const std::vector<train::ItemPrediction>& preds) {
  std::ostringstream ss;
  io::CsvWriter w(ss, {"ladder_id", "rung_index", "sur", "smr"});
  for (const auto& p : preds) {
    w.row({p.ladder_id, std::to_string(p.rung_index), io::format_real(p.pred.sur), io::format_real(p.pred.smr)});
  }
  return ss.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SUR/SMR label aggregation, proxy labels and prediction network"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");
  std::string config_path;
  app.add_option("--config", config_path, "Run-config JSON (default: $SURMR_CONFIG)");

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "Satisfaction records -> per-rung SUR or SMR curves");
  std::string records_path, manifest_path, out_path, kind = "SUR";
  agg->add_option("--records", records_path, "Satisfaction records CSV")->required();
  agg->add_option("--manifest", manifest_path, "Ladder manifest JSON")->required();
  agg->add_option("--kind", kind, "SUR (human subjects) or SMR (machine subjects)")->required();
  agg->add_option("--out", out_path, "Ratio-curve CSV to write")->required();

  // simulate-machines
  auto* sim = app.add_subcommand("simulate-machines", "Synthetic machine satisfaction records");
  std::string thresholds;
  std::size_t machines = 0;
  double flip_rate = 0.0;
  std::uint64_t seed = 0;
  sim->add_option("--manifest", manifest_path, "Ladder manifest JSON")->required();
  auto* thr_opt = sim->add_option("--thresholds", thresholds, "Comma-separated per-machine rung thresholds");
  auto* mach_opt = sim->add_option("--machines", machines, "Draw this many thresholds per ladder instead");
  thr_opt->excludes(mach_opt);
  sim->add_option("--flip-rate", flip_rate, "Probability of flipping each verdict");
  sim->add_option("--seed", seed, "Seed")->required();
  sim->add_option("--out", out_path, "Records CSV to write")->required();

  // labelgen
  auto* lg = app.add_subcommand("labelgen", "Score tables -> proxy SUR labels");
  std::string scores_path, builtin, score_builtins = "psnr,ssim", monotonicity_path;
  double eps_deg = labelgen::LabelgenConfig{}.eps_deg, psnr_cap = labelgen::BuiltinConfig{}.psnr_cap_db;
  std::size_t workers = 0;
  lg->add_option("--scores", scores_path, "External score table CSV");
  lg->add_option("--manifest", manifest_path, "Ladder manifest JSON")->required();
  lg->add_option("--builtin", builtin, "Also score manifest images with these built-ins (psnr,ssim)");
  auto* eps_opt = lg->add_option("--eps-deg", eps_deg, "Degenerate-ladder range threshold");
  auto* cap_opt = lg->add_option("--psnr-cap", psnr_cap, "PSNR returned for identical images (dB)");
  lg->add_option("--monotonicity-report", monotonicity_path, "CSV of rungs where a scorer's quality rises");
  lg->add_option("--workers", workers, "Threads for built-in scoring");
  lg->add_option("--out", out_path, "Proxy-label CSV to write")->required();

  // score
  auto* sc = app.add_subcommand("score", "Built-in PSNR/SSIM score table for a manifest");
  sc->add_option("--manifest", manifest_path, "Ladder manifest JSON")->required();
  sc->add_option("--builtin", score_builtins, "Scorers (psnr,ssim)")->capture_default_str();
  auto* sc_cap_opt = sc->add_option("--psnr-cap", psnr_cap, "PSNR returned for identical images (dB)");
  sc->add_option("--workers", workers, "Threads");
  sc->add_option("--out", out_path, "Score table CSV to write")->required();

  // split
  auto* sp = app.add_subcommand("split", "Ladder-level train/val/test assignment");
  std::string fractions;
  sp->add_option("--manifest", manifest_path, "Ladder manifest JSON")->required();
  auto* sp_seed_opt = sp->add_option("--seed", seed, "Shuffle seed (default: run config split.seed)");
  sp->add_option("--fractions", fractions, "train,val,test fractions (default 0.7,0.1,0.2)");
  sp->add_option("--out", out_path, "Split CSV to write")->required();

  // pretrain / finetune
  TrainCommand pre_cmd, fine_cmd;
  auto* pre = app.add_subcommand("pretrain", "Train on proxy SUR + SMR labels");
  pre->add_option("--manifest", pre_cmd.manifest, "Ladder manifest JSON")->required();
  pre->add_option("--proxy-labels", pre_cmd.sur_labels, "Proxy SUR labels CSV")->required();
  pre->add_option("--smr-labels", pre_cmd.smr_labels, "SMR labels CSV")->required();
  pre->add_option("--split-file", pre_cmd.split_file, "Split CSV; without it every ladder trains");
  pre->add_option("--init", pre_cmd.init, "Continue from this checkpoint");
  pre->add_option("--out", pre_cmd.out, "Checkpoint to write")->required();
  pre->add_option("--log", pre_cmd.log, "Per-step loss CSV");
  pre->add_option("--report", pre_cmd.report, "Run report JSON");
  pre_cmd.flags.add(pre);

  auto* fine = app.add_subcommand("finetune", "Train on ground-truth SUR + SMR labels");
  fine->add_option("--manifest", fine_cmd.manifest, "Ladder manifest JSON")->required();
  fine->add_option("--sur-labels", fine_cmd.sur_labels, "SUR labels CSV");
  fine->add_option("--smr-labels", fine_cmd.smr_labels, "SMR labels CSV");
  fine->add_option("--split-file", fine_cmd.split_file, "Split CSV; without it every ladder trains");
  fine->add_option("--init", fine_cmd.init, "Warm-start checkpoint (omit to train from scratch)");
  fine->add_option("--out", fine_cmd.out, "Checkpoint to write")->required();
  fine->add_option("--log", fine_cmd.log, "Per-step loss CSV");
  fine->add_option("--report", fine_cmd.report, "Run report JSON");
  fine->add_flag("--no-sur-loss", fine_cmd.no_sur, "Mask the SUR term");
  fine->add_flag("--no-smr-loss", fine_cmd.no_smr, "Mask the SMR term");
  fine->add_flag("--freeze-backbone", fine_cmd.freeze, "Keep backbone parameters fixed");
  fine_cmd.flags.add(fine);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "MAE of a checkpoint on one split");
  std::string checkpoint, sur_labels, smr_labels, split_file, split_name = "test", summary_path, dataset_name;
  ev->add_option("--checkpoint", checkpoint, "Checkpoint")->required();
  ev->add_option("--manifest", manifest_path, "Ladder manifest JSON")->required();
  ev->add_option("--sur-labels", sur_labels, "SUR labels CSV");
  ev->add_option("--smr-labels", smr_labels, "SMR labels CSV");
  ev->add_option("--split-file", split_file, "Split CSV; without it every ladder is evaluated");
  ev->add_option("--split", split_name, "Split to evaluate (train, val, test)");
  ev->add_option("--dataset", dataset_name, "Dataset name for the summary");
  ev->add_option("--out", out_path, "Metrics report JSON")->required();
  ev->add_option("--summary", summary_path, "Flat summary CSV");

  // predict
  auto* pr = app.add_subcommand("predict", "Per-rung SUR/SMR predictions");
  pr->add_option("--checkpoint", checkpoint, "Checkpoint")->required();
  pr->add_option("--manifest", manifest_path, "Ladder manifest JSON")->required();
  pr->add_option("--out", out_path, "Prediction CSV to write")->required();

  // ablate
  auto* ab = app.add_subcommand("ablate", "Train and evaluate every variant");
  std::string variants = "full,no_dfrl,no_mhaap,transformer_fusion,mlp_fusion,all_features", report_path;
  TrainFlags ab_flags;
  ab->add_option("--manifest", manifest_path, "Ladder manifest JSON")->required();
  ab->add_option("--sur-labels", sur_labels, "SUR labels CSV")->required();
  ab->add_option("--smr-labels", smr_labels, "SMR labels CSV")->required();
  ab->add_option("--split-file", split_file, "Split CSV; without it every ladder trains and evaluates");
  ab->add_option("--variants", variants, "Comma-separated variants");
  ab->add_option("--dataset", dataset_name, "Dataset name for the table");
  ab->add_option("--out", out_path, "Comparison table CSV")->required();
  ab->add_option("--report", report_path, "Full reports JSON");
  ab_flags.add(ab, false);

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  std::string modules = "all";
  train::GradcheckOptions gopt;
  bool corrupt = false;
  gc->add_option("--modules", modules, "Comma-separated modules or 'all'");
  gc->add_option("--step", gopt.step, "Central-difference step");
  gc->add_option("--tolerance", gopt.tolerance, "Maximum relative error");
  gc->add_option("--seed", gopt.seed, "Seed for random parameters and inputs")->required();
  gc->add_option("--out", out_path, "Report CSV");
  gc->add_flag("--corrupt", corrupt, "Perturb one analytic gradient (negative control)");

  // --config may follow the command name.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (agg->parsed()) {
      const auto k = core::parse_ratio_kind(kind);
      echo(out, "aggregate", {{"records", records_path}, {"manifest", manifest_path}, {"kind", kind}, {"out", out_path}});
      const auto manifest = io::read_manifest(manifest_path);
      const auto records = io::read_records(records_path);
      if (records.empty()) throw Error("'" + records_path + "': no records");
      std::map<std::string, std::vector<core::SatisfactionRecord>> by_ladder;
      for (const auto& r : records) by_ladder[r.ladder_id].push_back(r);
      for (const auto& [id, v] : by_ladder) manifest.find(id);
      std::vector<core::RatioCurve> curves;
      for (const auto& l : manifest.ladders) {
        try {
          curves.push_back(core::ratio_curve(l, by_ladder[l.ladder_id], k));
        } catch (const Error& e) {
          throw Error("ladder '" + l.ladder_id + "': " + e.what());
        }
      }
      io::write_text_file(out_path, io::format_curves(curves));
      out << "wrote " << curves.size() << " curves to " << out_path << "\n";
      return 0;
    }

    if (sim->parsed()) {
      if (!thr_opt->count() && !mach_opt->count()) throw Error("give --thresholds or --machines");
      echo(out, "simulate-machines",
           {{"manifest", manifest_path}, {"thresholds", thresholds}, {"machines", machines}, {"flip_rate", flip_rate},
            {"seed", seed}, {"out", out_path}});
      const auto manifest = io::read_manifest(manifest_path);
      std::vector<core::SatisfactionRecord> all;
      for (const auto& l : manifest.ladders) {
        core::MachinePopulationSpec spec;
        spec.flip_rate = flip_rate;
        if (thr_opt->count()) {
          for (const auto& t : split_list(thresholds)) {
            int v = 0;
            const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc() || p != t.data() + t.size()) throw Error("bad threshold '" + t + "'");
            spec.thresholds.push_back(v);
          }
        } else {
          std::mt19937_64 rng(core::derive_seed(seed, "thresholds/" + l.ladder_id));
          for (std::size_t m = 0; m < machines; ++m) {
            spec.thresholds.push_back(static_cast<int>(rng() % (l.size() + 1)));
          }
        }
        auto recs = core::simulate_machine_population(l, spec, core::derive_seed(seed, l.ladder_id));
        all.insert(all.end(), recs.begin(), recs.end());
      }
      io::write_text_file(out_path, io::format_records(all));
      out << "wrote " << all.size() << " records to " << out_path << "\n";
      return 0;
    }

    if (lg->parsed() || sc->parsed()) {
      const bool is_score = sc->parsed();
      // run config "labelgen": {"eps_deg", "psnr_cap"}; flags win
      const json lg_rc = section(load_run_config(config_path), "labelgen");
      if (!eps_opt->count()) eps_deg = lg_rc.value("eps_deg", eps_deg);
      if (!(is_score ? sc_cap_opt : cap_opt)->count()) psnr_cap = lg_rc.value("psnr_cap", psnr_cap);
      // separate variable: a default on the score option would leak into labelgen
      if (is_score) builtin = score_builtins;
      if (!is_score && scores_path.empty() && builtin.empty()) throw Error("give --scores and/or --builtin");
      labelgen::BuiltinConfig bcfg;
      bcfg.psnr_cap_db = psnr_cap;
      labelgen::LabelgenConfig lcfg;
      lcfg.eps_deg = eps_deg;
      echo(out, is_score ? "score" : "labelgen",
           {{"manifest", manifest_path}, {"scores", scores_path}, {"builtin", builtin}, {"eps_deg", eps_deg},
            {"psnr_cap", psnr_cap}, {"workers", workers}, {"out", out_path}});
      const auto manifest = io::read_manifest(manifest_path);
      labelgen::ScoreTable table = scores_path.empty() ? labelgen::ScoreTable{} : labelgen::ingest_external_scores(scores_path);
      const auto names = split_list(builtin);
      for (const auto& n : names) labelgen::builtin_descriptor(n);
      if (!names.empty()) {
        train::configure_threads(workers);
        const auto& ladders = manifest.ladders;
        // One slot per ladder so the table is filled in a fixed order.
        std::vector<std::vector<std::vector<double>>> results(ladders.size());
        std::vector<std::string> failures(ladders.size());
#pragma omp parallel for schedule(dynamic)
        for (std::size_t i = 0; i < ladders.size(); ++i) {
          try {
            const auto ref = io::read_image(manifest.resolve(ladders[i].original_ref));
            for (const auto& r : ladders[i].rungs) {
              const auto dist = io::read_image(manifest.resolve(r.image_ref));
              std::vector<double> row;
              for (const auto& n : names) row.push_back(labelgen::score_builtin(n, ref, dist, bcfg));
              results[i].push_back(std::move(row));
            }
          } catch (const std::exception& e) {
            failures[i] = "ladder '" + ladders[i].ladder_id + "': " + e.what();
          }
        }
        for (const auto& f : failures)
          if (!f.empty()) throw Error(f);
        for (std::size_t i = 0; i < ladders.size(); ++i)
          for (std::size_t r = 0; r < ladders[i].rungs.size(); ++r)
            for (std::size_t s = 0; s < names.size(); ++s)
              table.add(ladders[i].ladder_id, ladders[i].rungs[r].rung_index, names[s], results[i][r][s],
                        labelgen::Polarity::higher_better, labelgen::Origin::builtin);
      }
      if (is_score) {
        io::write_text_file(out_path, labelgen::format_score_table(table));
        out << "wrote " << table.size() << " scores to " << out_path << "\n";
        return 0;
      }
      const auto& scorers = table.scorers();
      io::LabelMap labels;
      std::vector<labelgen::MonotonicityViolation> violations;
      for (const auto& l : manifest.ladders) {
        auto set = labelgen::proxy_sur(table, scorers, l, lcfg);
        labels.insert(set.labels.begin(), set.labels.end());
        auto v = labelgen::monotonicity_report(table, scorers, l);
        violations.insert(violations.end(), v.begin(), v.end());
      }
      io::write_text_file(out_path, io::format_proxy_labels(labels));
      if (!monotonicity_path.empty()) {
        std::ostringstream ss;
        io::CsvWriter w(ss, {"ladder_id", "scorer_id", "rung_index", "previous", "current"});
        for (const auto& v : violations) {
          w.row({v.ladder_id, v.scorer_id, std::to_string(v.rung_index), io::format_real(v.previous),
                 io::format_real(v.current)});
        }
        io::write_text_file(monotonicity_path, ss.str());
      }
      out << "wrote " << labels.size() << " proxy labels from " << scorers.size() << " scorers to " << out_path
          << " (" << violations.size() << " monotonicity violations)\n";
      return 0;
    }

    if (sp->parsed()) {
      auto spec = section(load_run_config(config_path), "split").get<train::SplitSpec>();
      if (sp_seed_opt->count()) spec.seed = seed;
      if (!fractions.empty()) {
        const auto f = split_list(fractions);
        if (f.size() != 3) throw Error("--fractions needs three comma-separated values");
        spec.train = std::stod(f[0]);
        spec.val = std::stod(f[1]);
        spec.test = std::stod(f[2]);
      }
      echo(out, "split", {{"manifest", manifest_path}, {"split", spec}, {"out", out_path}});
      const auto manifest = io::read_manifest(manifest_path);
      std::vector<std::string> ids;
      for (const auto& l : manifest.ladders) ids.push_back(l.ladder_id);
      const auto s = train::split_dataset(ids, spec);
      io::write_text_file(out_path, train::format_split(s));
      out << "train " << s.train.size() << ", val " << s.val.size() << ", test " << s.test.size() << "\n";
      return 0;
    }

    if (pre->parsed()) {
      pre_cmd.config_path = config_path;
      return run_training(pre_cmd, "pretrain", out);
    }
    if (fine->parsed()) {
      fine_cmd.config_path = config_path;
      return run_training(fine_cmd, "finetune", out);
    }

    if (ev->parsed()) {
      echo(out, "evaluate",
           {{"checkpoint", checkpoint}, {"manifest", manifest_path}, {"sur_labels", sur_labels},
            {"smr_labels", smr_labels}, {"split_file", split_file}, {"split", split_name}, {"out", out_path}});
      if (sur_labels.empty() && smr_labels.empty()) throw Error("give --sur-labels and/or --smr-labels");
      const auto ck = io::load_checkpoint(checkpoint);
      const auto manifest = io::read_manifest(manifest_path);
      const auto data = build_splits(manifest, split_file, maybe_labels(sur_labels, kSurColumns),
                                     maybe_labels(smr_labels, kSmrColumns), ck.network.config().backbone);
      const train::Dataset* chosen = nullptr;
      if (split_file.empty()) {
        chosen = &data.train;
        split_name = "all";
      } else if (split_name == "train") {
        chosen = &data.train;
      } else if (split_name == "val") {
        chosen = &data.val;
      } else if (split_name == "test") {
        chosen = &data.test;
      } else {
        throw Error("unknown split '" + split_name + "'");
      }
      train::MetricsReport report;
      report.variant = std::string(model::to_string(ck.network.config().variant));
      report.dataset = dataset_name.empty() ? manifest.base_dir.filename().string() : dataset_name;
      report.seed = ck.meta.seed;
      report.steps = ck.meta.step;
      report.config = {{"network", ck.network.config()}, {"checkpoint", checkpoint}, {"split", split_name}};
      report.config_hash = train::config_hash(report.config);
      report.splits.push_back(train::evaluate(ck.network, *chosen, split_name));
      io::write_text_file(out_path, train::report_to_json(report).dump(2) + "\n");
      if (!summary_path.empty()) io::write_text_file(summary_path, train::format_summary({report}));
      const auto& m = report.splits.front();
      out << split_name << ": n=" << m.count << " mae_sur=" << (m.mae_sur ? io::format_real(*m.mae_sur) : "-")
          << " mae_smr=" << (m.mae_smr ? io::format_real(*m.mae_smr) : "-") << "\n";
      return 0;
    }

    if (pr->parsed()) {
      echo(out, "predict", {{"checkpoint", checkpoint}, {"manifest", manifest_path}, {"out", out_path}});
      const auto ck = io::load_checkpoint(checkpoint);
      const auto manifest = io::read_manifest(manifest_path);
      const auto& bb = ck.network.config().backbone;
      std::vector<train::ItemPrediction> preds;
      std::vector<std::string> failures;
      for (const auto& l : manifest.ladders) {
        std::optional<nn::Tensor> original;
        try {
          original = model::preprocess(io::to_rgb_tensor(io::read_image(manifest.resolve(l.original_ref))), bb);
        } catch (const std::exception& e) {
          for (const auto& r : l.rungs) failures.push_back(l.ladder_id + "," + std::to_string(r.rung_index) + ": " + e.what());
          continue;
        }
        for (const auto& r : l.rungs) {
          try {
            const auto comp = model::preprocess(io::to_rgb_tensor(io::read_image(manifest.resolve(r.image_ref))), bb);
            preds.push_back({l.ladder_id, r.rung_index, ck.network.predict(*original, comp), {}});
          } catch (const std::exception& e) {
            failures.push_back(l.ladder_id + "," + std::to_string(r.rung_index) + ": " + e.what());
          }
        }
      }
      std::sort(preds.begin(), preds.end(), [](const auto& a, const auto& b) {
        return std::tie(a.ladder_id, a.rung_index) < std::tie(b.ladder_id, b.rung_index);
      });
      io::write_text_file(out_path, predictions_csv(preds));
      for (const auto& f : failures) err << "error: " << f << "\n";
      out << "wrote " << preds.size() << " predictions to " << out_path << "\n";
      return failures.empty() ? 0 : 1;
    }

    if (ab->parsed()) {
      const json rc = load_run_config(config_path);
      auto tcfg = resolve_train(rc, "ablate");
      ab_flags.apply(tcfg);
      tcfg.validate();
      const auto ncfg = resolve_network(rc);
      std::vector<model::Variant> vs;
      for (const auto& v : split_list(variants)) vs.push_back(model::parse_variant(v));
      if (vs.empty()) throw Error("ablation needs at least one variant");
      const json resolved{{"network", ncfg}, {"train", tcfg}, {"variants", split_list(variants)},
                          {"inputs", {{"manifest", manifest_path}, {"sur_labels", sur_labels},
                                      {"smr_labels", smr_labels}, {"split_file", split_file}}}};
      echo(out, "ablate", resolved);
      const auto manifest = io::read_manifest(manifest_path);
      auto data = build_splits(manifest, split_file, io::read_labels(sur_labels, kSurColumns),
                               io::read_labels(smr_labels, kSmrColumns), ncfg.backbone);
      train::AblationDataset ds{dataset_name.empty() ? manifest.base_dir.filename().string() : dataset_name,
                                std::move(data.train), std::move(data.val), std::move(data.test)};
      const auto table = train::run_ablation_matrix(vs, {ds}, ncfg, tcfg, [&](const train::AblationRow& r) {
        out << r.variant << ": " << (r.error.empty() ? "ok" : "error: " + r.error) << "\n";
      });
      io::write_text_file(out_path, train::format_ablation_table(table));
      if (!report_path.empty()) {
        json rows = json::array();
        for (const auto& r : table.rows) {
          rows.push_back(r.error.empty() ? train::report_to_json(r.report, false)
                                         : json{{"variant", r.variant}, {"error", r.error}});
        }
        io::write_text_file(report_path, json{{"config", resolved}, {"runs", rows}}.dump(2) + "\n");
      }
      if (!table.ok()) {
        for (const auto& r : table.rows)
          if (!r.error.empty()) err << "error: " << r.variant << ": " << r.error << "\n";
        return 1;
      }
      return 0;
    }

    if (gc->parsed()) {
      gopt.corrupt = corrupt;
      echo(out, "gradcheck",
           {{"modules", modules}, {"step", gopt.step}, {"tolerance", gopt.tolerance}, {"floor", gopt.floor},
            {"seed", gopt.seed}, {"corrupt", corrupt}});
      const auto report = train::gradient_check_suite(split_list(modules), gopt);
      const auto text = train::format_gradcheck(report);
      if (!out_path.empty()) io::write_text_file(out_path, text);
      out << text;
      if (!report.passed()) {
        err << "error: gradient check failed\n";
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace surmr::cli
