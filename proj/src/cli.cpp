#include "dhnet/cli.hpp"

#include <CLI11.hpp>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dhnet/detect.hpp"
#include "dhnet/encoder.hpp"
#include "dhnet/error.hpp"
#include "dhnet/feature_file.hpp"
#include "dhnet/features.hpp"
#include "dhnet/plot.hpp"
#include "dhnet/synth.hpp"

namespace dhnet {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const char* kind) {
  static const std::pair<const char*, int> table[] = {
      {"invalid_argument", kExitInvalidArgument}, {"usage", kExitInvalidArgument},
      {"io_error", kExitIo},                      {"missing_tool", kExitMissingTool},
      {"parse_error", kExitParse},                {"incompatible_artifact", kExitIncompatible},
      {"training_abort", kExitTrainingAbort},     {"undefined_metrics", kExitUndefinedMetrics},
      {"external_tool_failed", kExitToolFailed},
  };
  for (const auto& [k, code] : table)
    if (std::strcmp(k, kind) == 0) return code;
  return kExitInternal;
}

StreamConfig stream_preset(const std::string& name) {
  StreamConfig c;
  if (name == "full") return c;
  if (name == "desk") {
    c.blocks = {BlockSpec{4, 1}, BlockSpec{8, 1}, BlockSpec{16, 1}};
    c.dense_widths = {128, 64};
    c.bn_momentum = 0.9;
    return c;
  }
  if (name == "tiny") {
    c.blocks = {BlockSpec{2, 2}, BlockSpec{4, 1}, BlockSpec{4, 1}};
    c.dense_widths = {16, 8};
    return c;
  }
  throw InvalidArgument("unknown network preset '" + name + "' (expected full, desk or tiny)");
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("error writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_text(path, text);
}

QPair parse_pair(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw InvalidArgument("q pair '" + s + "' must look like Q1:Q2");
  try {
    return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw InvalidArgument("q pair '" + s + "' must look like Q1:Q2");
  }
}

// ---------------------------------------------------------------- synth --

struct SynthArgs {
  std::string out;
  std::uint64_t seed = 0;
  std::string kind = "planes";
  int n = 2000;
  int width = 256, height = 256;
  std::vector<int> q = {3, 5, 7};
  std::vector<std::string> pairs;
  std::string codec_qm = "Q2", aux_qm = "Q1";
  std::vector<double> mix = {1.0, 1.0, 1.0};
  int frames = 120, g1 = 6, g2 = 6;
};

void run_synth(const SynthArgs& a, std::ostream& out) {
  if (a.mix.size() != 3) throw InvalidArgument("--mix takes three weights: gradient,noise,rectangles");
  SynthConfig cfg;
  cfg.n_planes = a.n;
  cfg.width = a.width;
  cfg.height = a.height;
  cfg.q_values = a.q;
  for (const std::string& p : a.pairs) cfg.pairs.push_back(parse_pair(p));
  cfg.codec_qm = parse_qm_id(a.codec_qm);
  cfg.aux_qm = parse_qm_id(a.aux_qm);
  cfg.seed = a.seed;
  cfg.mix = {a.mix[0], a.mix[1], a.mix[2]};
  cfg.validate();
  const fs::path dir = a.out;

  if (a.kind == "planes") {
    const DatasetSplit split = write_plane_dataset(cfg, dir);
    std::size_t ones = 0;
    for (const FrameRecord& r : split.all) ones += r.label;
    out << json{{"planes", split.all.size()},      {"double", ones},
                {"single", split.all.size() - ones}, {"train", split.train.size()},
                {"val", split.validation.size()},  {"test", split.test.size()}}
               .dump()
        << "\n";
    return;
  }
  if (a.kind != "video") throw InvalidArgument("--kind must be planes or video");
  if (a.g1 < 1 || a.g2 < 1) throw InvalidArgument("--g1/--g2 must be >= 1");

  VideoConfig vc;
  vc.n_frames = a.frames;
  vc.width = a.width;
  vc.height = a.height;
  vc.codec_qm = cfg.codec_qm;
  vc.seed = a.seed;
  vc.mix = cfg.mix;
  const std::vector<QPair> pairs = cfg.effective_pairs();
  std::vector<FrameRecord> records;
  for (int v = 0; v < a.n; ++v) {
    char name[32];
    std::snprintf(name, sizeof name, "video_%04d", v);
    const std::size_t slot = static_cast<std::size_t>(v) / 2;
    std::vector<YPlane> frames;
    int label, q_last;
    if (v % 2 == 0) {
      q_last = cfg.q_values[slot % cfg.q_values.size()];
      frames = synth_single_video(vc, static_cast<std::uint64_t>(v), a.g2, q_last);
      label = 0;
    } else {
      const QPair p = pairs[slot % pairs.size()];
      frames = synth_double_video(vc, static_cast<std::uint64_t>(v), a.g1, p.first, a.g2, p.second);
      q_last = p.second;
      label = 1;
    }
    write_frames(frames, dir / name);
    for (std::size_t t = 0; t < frames.size(); ++t) {
      char fn[64];
      std::snprintf(fn, sizeof fn, "%s/frame_%05zu.pgm", name, t);
      records.push_back(FrameRecord{fn, label, q_last, cfg.aux_qm, a.g2, static_cast<int>(t)});
    }
  }
  write_manifest(records, dir / "manifest.jsonl");
  out << json{{"videos", a.n}, {"frames", records.size()}}.dump() << "\n";
}

// --------------------------------------------------------------- ingest --

struct IngestArgs {
  std::string frames, out;
  int label = 0, q_s = 0, gop = 6;
  std::string qm = "Q1";
  bool all_frames = false;
};

void run_ingest(const IngestArgs& a, std::ostream& out) {
  if (a.label != 0 && a.label != 1) throw InvalidArgument("--label must be 0 or 1");
  if (a.q_s < 1 || a.q_s > 31) throw InvalidArgument("--q-s must be in 1..31");
  const QmId qm = parse_qm_id(a.qm);
  const std::vector<fs::path> frames = list_frames(a.frames);
  if (frames.empty()) throw IoError("no frames found in " + a.frames);
  const fs::path dir = a.out;
  fs::create_directories(dir / "frames");
  std::vector<int> keep;
  if (a.all_frames) {
    for (std::size_t t = 0; t < frames.size(); ++t) keep.push_back(static_cast<int>(t));
  } else {
    keep = iframe_indices(a.gop, static_cast<int>(frames.size()));
  }
  std::vector<FrameRecord> records;
  for (int t : keep) {
    char fn[48];
    std::snprintf(fn, sizeof fn, "frames/frame_%05d.pgm", t);
    write_pgm(load_luma(frames[t]), dir / fn);
    records.push_back(FrameRecord{fn, a.label, a.q_s, qm, a.gop, t});
  }
  write_manifest(records, dir / "manifest.jsonl");
  out << json{{"frames", frames.size()}, {"records", records.size()}}.dump() << "\n";
}

// -------------------------------------------------------------- extract --

struct ExtractArgs {
  std::string manifest, out;
  int alpha = kDefaultAlpha;
};

void run_extract(const ExtractArgs& a, std::ostream& out) {
  if (a.alpha < 1) throw InvalidArgument("--alpha must be >= 1");
  const fs::path manifest = a.manifest;
  const std::vector<FrameRecord> records = load_manifest(manifest);
  const fs::path base = manifest.parent_path();
  FeatureFileWriter writer(a.out);
  constexpr std::size_t kChunk = 64;
  for (std::size_t start = 0; start < records.size(); start += kChunk) {
    const std::size_t end = std::min(records.size(), start + kChunk);
    std::vector<FeatureRecord> chunk(end - start);
    std::string failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = start; i < end; ++i) {
      try {
        const FrameRecord& r = records[i];
        const fs::path p = fs::path(r.path).is_absolute() ? fs::path(r.path) : base / r.path;
        const FeatureSet f = extract_all(load_luma(p), matrix_for(r.q_m_id), r.q_s_last, a.alpha);
        chunk[i - start] = FeatureRecord::from_features(f, r.label, r.q_s_last);
      } catch (const std::exception& e) {
#pragma omp critical(extract_failure)
        if (failure.empty()) failure = records[i].path + ": " + e.what();
      }
    }
    if (!failure.empty()) throw IoError("extract: " + failure);
    for (const FeatureRecord& r : chunk) writer.append(r);
  }
  writer.close();
  out << json{{"records", writer.count()}, {"out", a.out}}.dump() << "\n";
}

// ---------------------------------------------------------------- train --

struct TrainArgs {
  std::string train, val, out;
  std::uint64_t seed = 0;
  std::string preset = "desk";
  std::vector<int> channels, strides, dense;
  std::optional<double> bn_momentum;
  int epochs = 20, batch = 32;
  double lr = 1e-4, gamma = 1e-4;
  std::string qm = "Q1";
};

void run_train(const TrainArgs& a, std::ostream& out) {
  StreamConfig sc = stream_preset(a.preset);
  if (!a.channels.empty()) {
    if (a.channels.size() != 3) throw InvalidArgument("--channels takes three widths");
    for (int i = 0; i < 3; ++i) sc.blocks[i].channels = a.channels[i];
  }
  if (!a.strides.empty()) {
    if (a.strides.size() != 3) throw InvalidArgument("--strides takes three values");
    for (int i = 0; i < 3; ++i) sc.blocks[i].stride = a.strides[i];
  }
  if (!a.dense.empty()) {
    if (a.dense.size() != 2) throw InvalidArgument("--dense takes two widths");
    sc.dense_widths = {a.dense[0], a.dense[1]};
  }
  if (a.bn_momentum) sc.bn_momentum = *a.bn_momentum;
  const std::vector<FeatureRecord> training = read_feature_file(a.train);
  std::vector<FeatureRecord> validation;
  if (!a.val.empty()) validation = read_feature_file(a.val);
  if (training.empty()) throw InvalidArgument("training feature file is empty");
  sc.alpha = training.front().blocks[0].rows / 2;

  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch;
  tc.gamma = a.gamma;
  tc.alpha = sc.alpha;
  tc.seed = a.seed;
  tc.adam.learning_rate = a.lr;
  tc.validate();

  DHNet model(sc, derive_seed(a.seed, 1));
  const TrainResult result = train(model, training, validation, tc, [&](const EpochStats& s) {
    json j{{"epoch", s.epoch}, {"loss", s.train_loss}, {"train_acc", s.train_accuracy}};
    j["val_acc"] = s.val_accuracy ? json(*s.val_accuracy) : json(nullptr);
    out << j.dump() << "\n" << std::flush;
  });

  ModelCheckpoint ckpt;
  ckpt.stream = sc;
  ckpt.train = tc;
  ckpt.features.alpha = sc.alpha;
  ckpt.features.qm_id = std::string(to_string(parse_qm_id(a.qm)));
  ckpt.tensors = result.best_state;
  save_checkpoint(ckpt, a.out);
  json summary{{"best_epoch", result.best_epoch}, {"parameters", model.parameter_count()}};
  summary["best_val_acc"] = result.best_val_accuracy ? json(*result.best_val_accuracy) : json(nullptr);
  out << summary.dump() << "\n";
}

// ----------------------------------------------------------------- eval --

struct EvalArgs {
  std::string model, features, out, scores;
};

void run_eval(const EvalArgs& a, std::ostream& out) {
  const ModelCheckpoint ckpt = load_checkpoint(a.model);
  const std::vector<FeatureRecord> records = read_feature_file(a.features);
  if (records.empty()) throw InvalidArgument("evaluation feature file is empty");
  for (const FeatureRecord& r : records) check_compatible(ckpt, r);
  DHNet model = instantiate(ckpt);
  const std::vector<Prediction> preds = predict(model, records);
  std::vector<int> truth;
  std::vector<double> scores;
  for (std::size_t i = 0; i < records.size(); ++i) {
    truth.push_back(records[i].label);
    scores.push_back(preds[i].score);
  }
  const Metrics m = compute_metrics(confusion(preds, truth));
  std::optional<RocCurve> roc;
  bool both = false;
  for (int t : truth) both |= t != truth.front();
  if (both) roc = roc_auc(scores, truth);
  json report = metrics_report(m, roc ? std::optional(roc->auc) : std::nullopt);
  json pts = json::array();
  if (roc)
    for (const RocPoint& p : roc->points) pts.push_back({p.fpr, p.tpr});
  report["roc"] = pts;
  emit(a.out, report.dump(2) + "\n", out);
  if (!a.scores.empty()) {
    std::vector<Prediction> rows = preds;
    // Ground truth in the label column, so the file can drive an ROC plot.
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].label = truth[i];
    write_text(a.scores, score_csv(std::span<const Prediction>(rows)));
  }
}

// --------------------------------------------------------------- detect --

struct DetectArgs {
  std::string model, frames, out, mode = "frame", qm;
  int phi = 5, gop = 6, q_s = 0;
};

void run_detect(const DetectArgs& a, std::ostream& out) {
  if (a.q_s < 1 || a.q_s > 31) throw InvalidArgument("--q-s must be in 1..31");
  const ModelCheckpoint ckpt = load_checkpoint(a.model);
  DHNet model = instantiate(ckpt);
  ScanParams params;
  params.q_m = matrix_for(parse_qm_id(a.qm.empty() ? ckpt.features.qm_id : a.qm));
  params.q_s = a.q_s;
  params.alpha = ckpt.features.alpha;
  const std::vector<fs::path> paths = list_frames(a.frames);
  if (paths.empty()) throw InvalidArgument("no frames found in " + a.frames);

  if (a.mode == "temporal") {
    const std::vector<ScanEntry> entries = temporal_scan(std::span<const fs::path>(paths), model, params);
    emit(a.out, score_csv(std::span<const ScanEntry>(entries)), out);
    return;
  }
  if (a.mode == "frame") {
    std::vector<Prediction> preds;
    for (std::size_t t = 0; t < paths.size(); ++t)
      preds.push_back(predict_plane(model, load_luma(paths[t]), params, static_cast<int>(t)));
    emit(a.out, score_csv(std::span<const Prediction>(preds)), out);
    return;
  }
  if (a.mode == "first-iframe") {
    const YPlane first = load_luma(paths.front());
    const Prediction p = first_iframe_detect(std::span(&first, 1), model, params);
    emit(a.out, json{{"mode", a.mode}, {"label", p.label}, {"score", p.score}, {"frame_index", 0}}.dump() + "\n",
         out);
    return;
  }
  if (a.mode == "gop") {
    if (a.phi < 1) throw InvalidArgument("--phi must be >= 1");
    if (a.gop < 1) throw InvalidArgument("--gop must be >= 1");
    const std::vector<int> iframes = iframe_indices(a.gop, static_cast<int>(paths.size()));
    std::vector<Prediction> votes;
    std::vector<int> labels;
    for (std::size_t k = 0; k < iframes.size() && k < static_cast<std::size_t>(a.phi); ++k) {
      votes.push_back(predict_plane(model, load_luma(paths[iframes[k]]), params, iframes[k]));
      labels.push_back(votes.back().label);
    }
    json v = json::array();
    for (const Prediction& p : votes) v.push_back({{"frame_index", p.frame_index}, {"score", p.score}, {"label", p.label}});
    emit(a.out, json{{"mode", a.mode}, {"phi", a.phi}, {"label", gop_vote(labels)}, {"votes", v}}.dump() + "\n", out);
    return;
  }
  throw InvalidArgument("--mode must be frame, gop, temporal or first-iframe");
}

// --------------------------------------------------------------- encode --

struct EncodeArgs {
  std::string input, out, codec = "libxvid", dump;
  int q_s = 3, gop = 6;
  std::vector<std::string> extra;
  bool print_args = false;
};

void run_encode_cmd(const EncodeArgs& a, std::ostream& out) {
  EncoderJob job{a.input, a.out, a.codec, a.q_s, a.gop, a.extra};
  if (a.print_args) {
    out << json(encode_arguments(job)).dump() << "\n";
    return;
  }
  fs::path dump = a.dump;
  if (dump.empty()) dump = fs::path(a.out).replace_extension("").string() + "_frames";
  const EncodeOutcome r = run_encode(job, dump);
  out << json{{"video", r.video.string()}, {"frames", r.frames.size()}, {"dump", dump.string()}}.dump() << "\n";
}

// ----------------------------------------------------------------- plot --

struct PlotArgs {
  std::string input, out, kind = "auto";
};

void run_plot(const PlotArgs& a, std::ostream& out) {
  std::string kind = a.kind;
  const fs::path in = a.input;
  if (kind == "auto") kind = in.extension() == ".json" ? "roc" : "series";
  const std::string text = read_text(in);
  std::string svg, csv;
  std::size_t points = 0;
  if (kind == "roc") {
    json report;
    try {
      report = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("report is not valid JSON: ") + e.what());
    }
    const std::vector<RocPoint> pts = roc_from_report(report);
    std::optional<double> auc;
    if (report.contains("auc") && report["auc"].is_number()) auc = report["auc"].get<double>();
    svg = roc_svg(pts, auc);
    csv = roc_csv(pts);
    points = pts.size();
  } else if (kind == "series") {
    const std::vector<Prediction> series = parse_score_csv(text);
    svg = series_svg(series);
    csv = series_csv(series);
    points = series.size();
  } else {
    throw InvalidArgument("--kind must be auto, roc or series");
  }
  const fs::path svg_path = a.out;
  fs::path csv_path = svg_path;
  csv_path.replace_extension(".csv");
  write_text(svg_path, svg);
  write_text(csv_path, csv);
  out << json{{"svg", svg_path.string()}, {"csv", csv_path.string()}, {"points", points}}.dump() << "\n";
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Double-compression detector for MPEG-4 intra frames", "dhnet");
  app.set_config("--config", "", "TOML file with [synth], [train], [detect] ... sections");
  app.require_subcommand(1);
  app.fallthrough();

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a seeded synthetic dataset");
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--seed", synth.seed, "base seed");
  s->add_option("--kind", synth.kind, "planes or video")->check(CLI::IsMember({"planes", "video"}));
  s->add_option("--n", synth.n, "number of planes (or videos)");
  s->add_option("--width", synth.width);
  s->add_option("--height", synth.height);
  s->add_option("--q", synth.q, "quantizer scales")->delimiter(',');
  s->add_option("--pairs", synth.pairs, "double-compression pairs Q1:Q2")->delimiter(',');
  s->add_option("--codec-qm", synth.codec_qm, "table used to quantize (Q1 or Q2)");
  s->add_option("--aux-qm", synth.aux_qm, "table recorded for the auxiliary feature");
  s->add_option("--mix", synth.mix, "gradient,noise,rectangles weights")->delimiter(',');
  s->add_option("--frames", synth.frames, "frames per video");
  s->add_option("--g1", synth.g1, "first-pass GOP size (video)");
  s->add_option("--g2", synth.g2, "second-pass GOP size (video)");

  IngestArgs ingest;
  auto* ig = app.add_subcommand("ingest", "convert decoded frames into Y planes and a manifest");
  ig->add_option("--frames", ingest.frames, "directory of decoded frames")->required();
  ig->add_option("--out", ingest.out, "output directory")->required();
  ig->add_option("--label", ingest.label, "0 single, 1 double");
  ig->add_option("--q-s", ingest.q_s, "last quantizer scale")->required();
  ig->add_option("--qm", ingest.qm, "auxiliary table id");
  ig->add_option("--gop", ingest.gop, "GOP size");
  ig->add_flag("--all-frames", ingest.all_frames, "keep every frame, not only I-frames");

  ExtractArgs extract;
  auto* ex = app.add_subcommand("extract", "compute DHF1 features for a manifest");
  ex->add_option("--manifest", extract.manifest)->required();
  ex->add_option("--out", extract.out, "feature file")->required();
  ex->add_option("--alpha", extract.alpha, "histogram half-range");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train a checkpoint on feature files");
  t->add_option("--train", tr.train, "training features")->required();
  t->add_option("--val", tr.val, "validation features");
  t->add_option("--out", tr.out, "checkpoint path")->required();
  t->add_option("--seed", tr.seed);
  t->add_option("--preset", tr.preset, "full, desk or tiny");
  t->add_option("--channels", tr.channels, "base-block widths")->delimiter(',');
  t->add_option("--strides", tr.strides, "base-block strides")->delimiter(',');
  t->add_option("--dense", tr.dense, "hidden dense widths")->delimiter(',');
  t->add_option("--bn-momentum", tr.bn_momentum, "batch-norm running-statistics momentum");
  t->add_option("--epochs", tr.epochs);
  t->add_option("--batch", tr.batch);
  t->add_option("--lr", tr.lr);
  t->add_option("--gamma", tr.gamma, "L2 weight on conv kernels");
  t->add_option("--qm", tr.qm, "auxiliary table the features were built with");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "score a feature file and report metrics");
  e->add_option("--model", ev.model)->required();
  e->add_option("--features", ev.features)->required();
  e->add_option("--out", ev.out, "report JSON (default stdout)");
  e->add_option("--scores", ev.scores, "per-record score CSV");

  DetectArgs det;
  auto* d = app.add_subcommand("detect", "run the detector on a directory of decoded frames");
  d->add_option("--model", det.model)->required();
  d->add_option("--frames", det.frames)->required();
  d->add_option("--mode", det.mode)->check(CLI::IsMember({"frame", "gop", "temporal", "first-iframe"}));
  d->add_option("--phi", det.phi, "I-frames voted in gop mode");
  d->add_option("--gop", det.gop, "GOP size");
  d->add_option("--q-s", det.q_s, "quantizer scale of the last encode")->required();
  d->add_option("--qm", det.qm, "auxiliary table (default from checkpoint)");
  d->add_option("--out", det.out, "output file (default stdout)");

  EncodeArgs enc;
  auto* en = app.add_subcommand("encode", "encode with the external encoder and dump decoded frames");
  en->add_option("--input", enc.input)->required();
  en->add_option("--out", enc.out, "encoded video")->required();
  en->add_option("--codec", enc.codec);
  en->add_option("--q-s", enc.q_s);
  en->add_option("--gop", enc.gop);
  en->add_option("--dump", enc.dump, "decoded frame directory");
  en->add_option("--extra", enc.extra, "additional encoder arguments");
  en->add_flag("--print-args", enc.print_args, "print the encoder argument list and exit");

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "render a score CSV or eval report as SVG + CSV");
  p->add_option("--input", pl.input)->required();
  p->add_option("--out", pl.out, "SVG path")->required();
  p->add_option("--kind", pl.kind, "auto, roc or series");

  std::vector<std::string> argv_store = {"dhnet"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    print_error(err, "usage", ex.what());
    return kExitInvalidArgument;
  }

  try {
    if (s->parsed()) run_synth(synth, out);
    else if (ig->parsed()) run_ingest(ingest, out);
    else if (ex->parsed()) run_extract(extract, out);
    else if (t->parsed()) run_train(tr, out);
    else if (e->parsed()) run_eval(ev, out);
    else if (d->parsed()) run_detect(det, out);
    else if (en->parsed()) run_encode_cmd(enc, out);
    else if (p->parsed()) run_plot(pl, out);
  } catch (const Error& ex) {
    print_error(err, ex.kind(), ex.what());
    return exit_code_for(ex.kind());
  } catch (const fs::filesystem_error& ex) {
    print_error(err, "io_error", ex.what());
    return kExitIo;
  } catch (const std::exception& ex) {
    print_error(err, "internal", ex.what());
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace dhnet
