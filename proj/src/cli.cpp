/*
 * Copyright 2026 The apesed Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "apesed/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "apesed/checkpoint.hpp"
#include "apesed/dataset.hpp"
#include "apesed/digest.hpp"
#include "apesed/error.hpp"
#include "apesed/kernels.hpp"
#include "apesed/metrics.hpp"
#include "apesed/pipeline.hpp"
#include "apesed/synth.hpp"
#include "apesed/training.hpp"
#include "apesed/transfer.hpp"

namespace apesed {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Collects what went in and out of one command; written as JSON next to the
// outputs.
class RunManifest {
 public:
  explicit RunManifest(std::string command)
      : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

  void flags_from(const CLI::App& sub) {
    for (const CLI::Option* opt : sub.get_options()) {
      if (opt->count() == 0 || opt->get_name() == "--help") continue;
      const auto& res = opt->results();
      std::string value;
      for (size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
      flags_[opt->get_name()] = value;
    }
  }
  void seed(const std::string& name, uint64_t value) { seeds_[name] = value; }
  void input(const fs::path& p) { inputs_.push_back(p); }
  void output(const fs::path& p) { outputs_.push_back(p); }
  void outputs(const PathList& ps) { outputs_.insert(outputs_.end(), ps.begin(), ps.end()); }

  void write(const fs::path& path) const {
    json j;
    j["command"] = command_;
    j["flags"] = flags_;
    j["version"] = kVersion;
    j["seeds"] = seeds_;
    j["inputs"] = digests(inputs_);
    j["outputs"] = digests(outputs_);
    j["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
    out << j.dump(2) << '\n';
  }

 private:
  static json digests(const std::vector<fs::path>& paths) {
    json j = json::object();
    for (const auto& p : paths)
      if (fs::is_regular_file(p)) j[p.string()] = sha256_file(p);
    return j;
  }

  std::string command_;
  std::chrono::steady_clock::time_point start_;
  std::map<std::string, std::string> flags_;
  std::map<std::string, uint64_t> seeds_;
  std::vector<fs::path> inputs_, outputs_;
};

fs::path sidecar(const fs::path& out) { return fs::path(out.string() + ".run.json"); }

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

Partition parse_partition(const std::string& name) {
  if (name == "train") return Partition::kTrain;
  if (name == "val") return Partition::kVal;
  if (name == "test") return Partition::kTest;
  throw Error(ErrorKind::kUsage, "partition must be train, val or test");
}

FeatureKind require_kind(const std::string& name) {
  const auto kind = parse_feature_kind(name);
  if (!kind) throw Error(ErrorKind::kUsage, "unknown feature kind " + name);
  return *kind;
}

void add_manifest_inputs(RunManifest& rm, const fs::path& manifest, const Corpus& corpus) {
  rm.input(manifest);
  rm.input(corpus.vocab_path);
  for (const auto& c : corpus.clips) {
    rm.input(c.apef);
    rm.input(c.apel);
  }
}

struct Args {
  // prep / featurize / annotate / synth
  std::string in, out, kind = "spectrogram", external, tsv, wav_dir;
  // corpus-level
  std::string manifest, split, ckpt, partition = "test", arch = "ar_lstm", feature, wav, apef, resume;
  uint64_t seed = 0;
  bool binary = false, no_balance = false;
  size_t batch_size = 1, epochs = 200, patience = 20, hidden = 1024, heads = 8, layers = 6;
  double dropout = 0.4, lr = 1e-4, min_dur = 0.1;
  size_t clips = 20, classes = 2;
  double boundary_noise = 0.0;
};

int cmd_prep(const Args& a, const CLI::App& sub) {
  RunManifest rm("prep");
  rm.flags_from(sub);
  for (const auto& p : list_wavs(a.in)) rm.input(p);
  rm.outputs(prep_directory(a.in, a.out));
  rm.write(fs::path(a.out) / "run_manifest.json");
  return 0;
}

int cmd_featurize(const Args& a, const CLI::App& sub) {
  RunManifest rm("featurize");
  rm.flags_from(sub);
  const FeatureKind kind = require_kind(a.kind);
  for (const auto& p : list_wavs(a.in)) rm.input(p);
  std::optional<fs::path> ext;
  if (!a.external.empty()) ext = a.external;
  try {
    rm.outputs(featurize_directory(kind, a.in, a.out, ext));
  } catch (const Error& e) {
    if (kind == FeatureKind::kExternal && e.kind() == ErrorKind::kMissingFile)
      std::cerr << "external features are produced by: " << exporter_hint(a.in, ext.value_or(a.out)) << '\n';
    throw;
  }
  rm.write(fs::path(a.out) / "run_manifest.json");
  return 0;
}

int cmd_annotate(const Args& a, const CLI::App& sub) {
  RunManifest rm("annotate");
  rm.flags_from(sub);
  rm.input(a.tsv);
  for (const auto& p : list_wavs(a.wav_dir)) rm.input(p);
  rm.outputs(annotate_directory(a.tsv, a.wav_dir, a.out));
  rm.write(fs::path(a.out) / "run_manifest.json");
  return 0;
}

int cmd_split(const Args& a, const CLI::App& sub) {
  RunManifest rm("split");
  rm.flags_from(sub);
  rm.seed("split", a.seed);
  rm.input(a.manifest);
  const Corpus corpus = load_manifest(a.manifest);
  ensure_parent(a.out);
  write_split(a.out, make_split(corpus, a.seed));
  rm.output(a.out);
  rm.write(sidecar(a.out));
  return 0;
}

int cmd_train(const Args& a, const CLI::App& sub) {
  RunManifest rm("train");
  rm.flags_from(sub);
  rm.seed("train", a.seed);
  const Corpus corpus = load_manifest(a.manifest);
  const Split split = read_split(a.split);
  rm.seed("split", split.seed);
  add_manifest_inputs(rm, a.manifest, corpus);
  rm.input(a.split);
  if (!a.feature.empty() && require_kind(a.feature) != corpus.feature_kind)
    throw Error(ErrorKind::kFeatureKindMismatch,
                "--feature " + a.feature + " but the manifest holds " + std::string(to_string(corpus.feature_kind)));

  TrainConfig tc;
  tc.batch_size = a.batch_size;
  tc.dropout = a.dropout;
  tc.max_epochs = a.epochs;
  tc.patience = a.patience;
  tc.learning_rate = a.lr;
  tc.seed = a.seed;
  tc.balance_weights = !a.no_balance;
  tc.binary = a.binary;

  TrainHooks hooks;
  hooks.on_epoch = [](const EpochRecord& r) {
    std::fprintf(stderr, "epoch %zu loss %.6f val_acc %.4f val_wf1 %.4f\n", r.epoch, r.train_loss, r.val_accuracy,
                 r.val_weighted_f1);
  };

  CorpusRun run = [&] {
    if (!a.resume.empty()) {
      rm.input(a.resume);
      return resume(a.resume, corpus, split, tc, hooks);
    }
    const auto arch = parse_arch(a.arch);
    if (!arch) throw Error(ErrorKind::kUsage, "unknown arch " + a.arch);
    ModelConfig mc;
    mc.arch = *arch;
    mc.hidden_size = a.hidden;
    mc.heads = a.heads;
    mc.layers = a.layers;
    return train(corpus, split, mc, tc, hooks);
  }();

  const fs::path out(a.out);
  fs::create_directories(out);
  save_checkpoint(out / "model.ckpt", run.checkpoint);
  write_train_log(out / "trainlog.jsonl", run.log);
  rm.output(out / "model.ckpt");
  rm.output(out / "trainlog.jsonl");
  rm.write(out / "run_manifest.json");
  std::printf("best epoch %zu val weighted F1 %.6f (%s)\n", run.log.best_epoch, run.log.best_val_f1,
              run.log.stopped_reason.c_str());
  return 0;
}

int cmd_eval(const Args& a, const CLI::App& sub) {
  RunManifest rm("eval");
  rm.flags_from(sub);
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  const Corpus corpus = load_manifest(a.manifest);
  const Split split = read_split(a.split);
  rm.seed("split", split.seed);
  rm.seed("train", ckpt.train_seed);
  rm.input(a.ckpt);
  add_manifest_inputs(rm, a.manifest, corpus);
  rm.input(a.split);
  const EvalReport report = evaluate_checkpoint(ckpt, corpus, partition_ids(split, parse_partition(a.partition)));
  ensure_parent(a.out);
  write_report(a.out, report, &ckpt.vocab);
  rm.output(a.out);
  rm.write(sidecar(a.out));
  std::printf("accuracy %.6f weighted_f1 %.6f\n", report.accuracy, report.weighted_f1);
  return 0;
}

int cmd_predict(const Args& a, const CLI::App& sub) {
  RunManifest rm("predict");
  rm.flags_from(sub);
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  rm.input(a.ckpt);
  rm.input(a.wav);
  AudioClip clip = canonicalize(load_wav(a.wav));
  clip.clip_id = fs::path(a.wav).stem().string();
  const FrameGrid grid = frame_grid(clip);
  FrameMatrix features;
  switch (ckpt.feature_kind) {
    case FeatureKind::kWaveform: features = waveform_features(clip, grid); break;
    case FeatureKind::kSpectrogram: features = spectrogram_features(clip, grid); break;
    case FeatureKind::kExternal: {
      const fs::path wav_dir = fs::path(a.wav).parent_path();
      if (a.apef.empty() || !fs::exists(a.apef))
        throw Error(ErrorKind::kMissingFile, "external-feature model needs --apef; produce it with: " +
                                                 exporter_hint(wav_dir.empty() ? "." : wav_dir, "<apef dir>"));
      rm.input(a.apef);
      features = load_external_features(a.apef, grid);
      break;
    }
  }
  const PosteriorMatrix post = ckpt.model.forward(features);
  const auto segments = to_segments(post, a.min_dur, clip.clip_id);
  ensure_parent(a.out);
  write_segments(a.out, segments, &ckpt.vocab);
  rm.output(a.out);
  rm.write(sidecar(a.out));
  return 0;
}

int cmd_transfer(const Args& a, const CLI::App& sub) {
  if (!a.binary) throw Error(ErrorKind::kUsage, "transfer supports binary mode only; pass --binary");
  RunManifest rm("transfer");
  rm.flags_from(sub);
  TransferJob job;
  job.checkpoint = a.ckpt;
  job.target = load_manifest(a.manifest);
  job.split = read_split(a.split);
  job.partition = parse_partition(a.partition);
  rm.seed("split", job.split.seed);
  rm.input(a.ckpt);
  add_manifest_inputs(rm, a.manifest, job.target);
  rm.input(a.split);
  const EvalReport report = transfer_eval(job);
  const ClassVocab vocab = binary_vocab();
  ensure_parent(a.out);
  write_report(a.out, report, &vocab);
  rm.output(a.out);
  rm.write(sidecar(a.out));
  std::printf("accuracy %.6f weighted_f1 %.6f\n", report.accuracy, report.weighted_f1);
  return 0;
}

int cmd_synth(const Args& a, const CLI::App& sub) {
  RunManifest rm("synth");
  rm.flags_from(sub);
  rm.seed("synth", a.seed);
  SynthConfig cfg;
  cfg.seed = a.seed;
  cfg.num_clips = a.clips;
  cfg.num_classes = a.classes;
  cfg.boundary_noise = a.boundary_noise;
  const SynthCorpus corpus = generate_synthetic(cfg);
  const fs::path out(a.out);
  write_synthetic(out, corpus, a.kind);
  for (const auto& c : corpus.clips) rm.output(out / "wav" / (c.clip_id + ".wav"));
  rm.output(out / "annotations.tsv");
  rm.output(out / "manifest.json");
  rm.write(out / "run_manifest.json");
  return 0;
}

void fail_line(int code, std::string_view kind, const std::string& msg) {
  std::string flat = msg;
  for (auto& ch : flat)
    if (ch == '\n' || ch == '\r') ch = ' ';
  std::fprintf(stderr, "error %d %.*s: %s\n", code, static_cast<int>(kind.size()), kind.data(), flat.c_str());
}

}  // namespace

int run(int argc, char** argv) {
  kernels::configure_threads_from_env();
  CLI::App app{"apesed: frame-level detection of great-ape calls"};
  app.set_version_flag("--version", std::string("apesed ") + kVersion);
  app.require_subcommand(1);
  Args a;

  auto* prep = app.add_subcommand("prep", "resample WAVs to 16 kHz mono");
  prep->add_option("--in", a.in, "input WAV directory")->required();
  prep->add_option("--out", a.out, "output directory")->required();

  auto* feat = app.add_subcommand("featurize", "write APEF feature files");
  feat->add_option("--kind", a.kind, "waveform | spectrogram | external")->required();
  feat->add_option("--in", a.in, "canonical WAV directory")->required();
  feat->add_option("--out", a.out, "APEF output directory")->required();
  feat->add_option("--external", a.external, "directory of exported APEF files (external kind)");

  auto* ann = app.add_subcommand("annotate", "rasterize an annotation TSV into APEL label tracks");
  ann->add_option("--tsv", a.tsv, "annotation TSV")->required();
  ann->add_option("--wav", a.wav_dir, "canonical WAV directory")->required();
  ann->add_option("--out", a.out, "label output directory")->required();

  auto* spl = app.add_subcommand("split", "seeded 80/10/10 clip split");
  spl->add_option("--manifest", a.manifest)->required();
  spl->add_option("--seed", a.seed)->required();
  spl->add_option("--out", a.out)->required();

  auto* tr = app.add_subcommand("train", "train a sequence model");
  tr->add_option("--manifest", a.manifest)->required();
  tr->add_option("--split", a.split)->required();
  tr->add_option("--arch", a.arch, "lstm | blstm | transformer | ar_lstm | ar_blstm");
  tr->add_option("--feature", a.feature, "must match the manifest's feature kind");
  tr->add_flag("--binary", a.binary, "collapse call types to call / non-call");
  tr->add_option("--batch-size", a.batch_size);
  tr->add_option("--dropout", a.dropout);
  tr->add_option("--epochs", a.epochs);
  tr->add_option("--patience", a.patience);
  tr->add_option("--lr", a.lr);
  tr->add_option("--seed", a.seed);
  tr->add_option("--hidden", a.hidden, "hidden size");
  tr->add_option("--heads", a.heads, "attention heads (transformer)");
  tr->add_option("--layers", a.layers, "encoder layers (transformer)");
  tr->add_flag("--no-balance", a.no_balance, "unit class weights");
  tr->add_option("--resume", a.resume, "continue from a checkpoint");
  tr->add_option("--out", a.out, "output directory")->required();

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a split partition");
  ev->add_option("--ckpt", a.ckpt)->required();
  ev->add_option("--manifest", a.manifest)->required();
  ev->add_option("--split", a.split)->required();
  ev->add_option("--partition", a.partition);
  ev->add_option("--out", a.out)->required();

  auto* pr = app.add_subcommand("predict", "call segments for one WAV");
  pr->add_option("--ckpt", a.ckpt)->required();
  pr->add_option("--wav", a.wav)->required();
  pr->add_option("--min-dur", a.min_dur, "drop segments shorter than this (seconds)");
  pr->add_option("--apef", a.apef, "exported features (external-feature models)");
  pr->add_option("--out", a.out)->required();

  auto* tf = app.add_subcommand("transfer", "zero-shot binary evaluation on another corpus");
  tf->add_option("--ckpt", a.ckpt)->required();
  tf->add_option("--manifest", a.manifest)->required();
  tf->add_option("--split", a.split)->required();
  tf->add_option("--partition", a.partition);
  tf->add_flag("--binary", a.binary);
  tf->add_option("--out", a.out)->required();

  auto* sy = app.add_subcommand("synth", "generate a synthetic corpus");
  sy->add_option("--out", a.out)->required();
  sy->add_option("--seed", a.seed);
  sy->add_option("--clips", a.clips);
  sy->add_option("--classes", a.classes);
  sy->add_option("--boundary-noise", a.boundary_noise, "annotation boundary jitter (seconds)");
  sy->add_option("--feature", a.kind, "feature kind recorded in the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_line(exit_code(ErrorKind::kUsage), to_string(ErrorKind::kUsage), e.what());
    return exit_code(ErrorKind::kUsage);
  }

  try {
    if (*prep) return cmd_prep(a, *prep);
    if (*feat) return cmd_featurize(a, *feat);
    if (*ann) return cmd_annotate(a, *ann);
    if (*spl) return cmd_split(a, *spl);
    if (*tr) return cmd_train(a, *tr);
    if (*ev) return cmd_eval(a, *ev);
    if (*pr) return cmd_predict(a, *pr);
    if (*tf) return cmd_transfer(a, *tf);
    if (*sy) return cmd_synth(a, *sy);
  } catch (const Error& e) {
    fail_line(exit_code(e.kind()), to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    fail_line(exit_code(ErrorKind::kIo), to_string(ErrorKind::kIo), e.what());
    return exit_code(ErrorKind::kIo);
  } catch (const std::exception& e) {
    fail_line(exit_code(ErrorKind::kIo), to_string(ErrorKind::kIo), e.what());
    return exit_code(ErrorKind::kIo);
  }
  return exit_code(ErrorKind::kUsage);
}

}  // namespace apesed
