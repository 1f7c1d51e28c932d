// Copyright 2026 The Phasecoder Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>

#include "phasecoder/errors.hpp"
#include "phasecoder/parallel.hpp"
#include "tool_util.hpp"

namespace pt = phasecoder::tools;

int main(int argc, char** argv) {
  CLI::App app{"phasecoder: microphone-geometry-agnostic spatial audio "
               "localization toolkit"};
  app.require_subcommand(1);

  int threads = phasecoder::default_threads();
  app.add_option("--threads", threads, "Worker thread cap for all commands");

  int exit_code = 0;
  const auto run = [&exit_code](int (*fn)(const nlohmann::json&),
                                const nlohmann::json& args) {
    exit_code = fn(args);
  };

  // --- simulate ------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  struct {
    std::uint64_t seed = 0;
    int num_scenes = 8;
    std::string out;
    std::string material_table;
    int max_order = -1;
    bool distractors = false;
    double snr_min = -5.0, snr_max = 15.0;
    double speech_min = 2.1, speech_max = 3.0;
    std::string speech_dir;
    bool pcm16 = false;
    int shard_size = 512;
    int min_mics = 3, max_mics = 8;
  } sim_opts;
  sim->add_option("--seed", sim_opts.seed, "Master RNG seed")->required();
  sim->add_option("--num-scenes", sim_opts.num_scenes, "Scene count")
      ->required();
  sim->add_option("--out", sim_opts.out, "Output directory")->required();
  sim->add_option("--material-table", sim_opts.material_table,
                  "JSON absorption table replacing the built-in materials");
  sim->add_option("--max-order", sim_opts.max_order,
                  "Image-source reflection order (-1 = adaptive)");
  sim->add_flag("--distractors", sim_opts.distractors,
                "Mix a distractor source at a random SNR");
  sim->add_option("--snr-min", sim_opts.snr_min, "Lowest mixing SNR (dB)");
  sim->add_option("--snr-max", sim_opts.snr_max, "Highest mixing SNR (dB)");
  sim->add_option("--speech-min", sim_opts.speech_min,
                  "Shortest speech duration (s)");
  sim->add_option("--speech-max", sim_opts.speech_max,
                  "Longest speech duration (s)");
  sim->add_option("--speech-dir", sim_opts.speech_dir,
                  "Directory of 16 kHz mono WAV files to use as speech");
  sim->add_flag("--pcm16", sim_opts.pcm16,
                "Write 16-bit PCM WAVs instead of float32");
  sim->add_option("--shard-size", sim_opts.shard_size, "Scenes per shard dir");
  sim->add_option("--min-mics", sim_opts.min_mics, "Smallest mic count");
  sim->add_option("--max-mics", sim_opts.max_mics, "Largest mic count");
  sim->callback([&] {
    run(pt::cmd_simulate,
        {{"seed", sim_opts.seed},
         {"num_scenes", sim_opts.num_scenes},
         {"out", sim_opts.out},
         {"material_table", sim_opts.material_table},
         {"max_order", sim_opts.max_order},
         {"distractors", sim_opts.distractors},
         {"snr_min", sim_opts.snr_min},
         {"snr_max", sim_opts.snr_max},
         {"speech_min", sim_opts.speech_min},
         {"speech_max", sim_opts.speech_max},
         {"speech_dir", sim_opts.speech_dir},
         {"pcm16", sim_opts.pcm16},
         {"shard_size", sim_opts.shard_size},
         {"min_mics", sim_opts.min_mics},
         {"max_mics", sim_opts.max_mics},
         {"threads", threads}});
  });

  // --- train ---------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Run the training curriculum");
  struct {
    std::string config;
    std::string data;
    std::string out;
    std::string resume;
  } train_opts;
  train->add_option("--config", train_opts.config, "JSON training config")
      ->required();
  train->add_option("--data", train_opts.data,
                    "Default dataset directory for stages without one");
  train->add_option("--out", train_opts.out, "Output directory")->required();
  train->add_option("--resume", train_opts.resume,
                    "train_state.bin to continue from");
  train->callback([&] {
    run(pt::cmd_train, {{"config", train_opts.config},
                        {"data", train_opts.data},
                        {"out", train_opts.out},
                        {"resume", train_opts.resume},
                        {"threads", threads}});
  });

  // --- eval ----------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Localization metrics on a dataset");
  struct {
    std::string ckpt, data, report;
    bool by_mic_count = false;
  } eval_opts;
  eval->add_option("--ckpt", eval_opts.ckpt, "Model checkpoint")->required();
  eval->add_option("--data", eval_opts.data, "Dataset directory")->required();
  eval->add_option("--report", eval_opts.report, "Output report JSON")
      ->required();
  eval->add_flag("--by-mic-count", eval_opts.by_mic_count,
                 "Add one report row per mic count");
  eval->callback([&] {
    run(pt::cmd_eval, {{"ckpt", eval_opts.ckpt},
                       {"data", eval_opts.data},
                       {"report", eval_opts.report},
                       {"by_mic_count", eval_opts.by_mic_count},
                       {"threads", threads}});
  });

  // --- qagen ---------------------------------------------------------------
  auto* qagen = app.add_subcommand("qagen", "Generate a spatial-QA dataset");
  struct {
    int task = 1;
    std::string scenes;
    int n = 100;
    std::uint64_t seed = 0;
    std::string out;
    std::string transcripts;
  } qa_opts;
  qagen->add_option("--task", qa_opts.task, "Task id 1..4")->required();
  qagen->add_option("--scenes", qa_opts.scenes, "Dataset directory")
      ->required();
  qagen->add_option("--n", qa_opts.n, "Record count")->required();
  qagen->add_option("--seed", qa_opts.seed, "RNG seed")->required();
  qagen->add_option("--out", qa_opts.out, "Output JSONL file")->required();
  qagen->add_option("--transcripts", qa_opts.transcripts,
                    "Text file with one transcript per line");
  qagen->callback([&] {
    run(pt::cmd_qagen, {{"task", qa_opts.task},
                        {"scenes", qa_opts.scenes},
                        {"n", qa_opts.n},
                        {"seed", qa_opts.seed},
                        {"out", qa_opts.out},
                        {"transcripts", qa_opts.transcripts}});
  });

  // --- score ---------------------------------------------------------------
  auto* score = app.add_subcommand("score", "Score predictions against a QA "
                                            "reference");
  struct {
    int task = 1;
    std::string pred, ref, report;
  } score_opts;
  score->add_option("--task", score_opts.task, "Task id 1..4")->required();
  score->add_option("--pred", score_opts.pred,
                    "Predictions: JSONL with an 'answer' field, or raw text "
                    "lines")
      ->required();
  score->add_option("--ref", score_opts.ref, "Reference QA JSONL")->required();
  score->add_option("--report", score_opts.report, "Optional report JSON");
  score->callback([&] {
    run(pt::cmd_score, {{"task", score_opts.task},
                        {"pred", score_opts.pred},
                        {"ref", score_opts.ref},
                        {"report", score_opts.report}});
  });

  // --- export-tokens ---------------------------------------------------------
  auto* ext = app.add_subcommand("export-tokens",
                                 "Export spatial soft tokens for a WAV");
  struct {
    std::string ckpt, wav, out, array;
  } ext_opts;
  ext->add_option("--ckpt", ext_opts.ckpt, "Model checkpoint")->required();
  ext->add_option("--wav", ext_opts.wav, "Multichannel WAV")->required();
  ext->add_option("--out", ext_opts.out, "Output token container")->required();
  ext->add_option("--array", ext_opts.array,
                  "Mic coordinates JSON (defaults to <wav>.array.json)");
  ext->callback([&] {
    run(pt::cmd_export_tokens, {{"ckpt", ext_opts.ckpt},
                                {"wav", ext_opts.wav},
                                {"out", ext_opts.out},
                                {"array", ext_opts.array}});
  });

  // --- inspect ---------------------------------------------------------------
  auto* inspect = app.add_subcommand(
      "inspect", "Dump per-frame head probabilities as CSV");
  struct {
    std::string ckpt, wav, out, array;
  } ins_opts;
  inspect->add_option("--ckpt", ins_opts.ckpt, "Model checkpoint")->required();
  inspect->add_option("--wav", ins_opts.wav, "Multichannel WAV")->required();
  inspect->add_option("--out", ins_opts.out, "Output CSV")->required();
  inspect->add_option("--array", ins_opts.array,
                      "Mic coordinates JSON (defaults to <wav>.array.json)");
  inspect->callback([&] {
    run(pt::cmd_inspect, {{"ckpt", ins_opts.ckpt},
                          {"wav", ins_opts.wav},
                          {"out", ins_opts.out},
                          {"array", ins_opts.array}});
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // exit 1: usage error
  } catch (const phasecoder::NumericError& e) {
    pt::log_event("error", "numeric_failure", {{"message", e.what()}});
    return 3;
  } catch (const phasecoder::DataError& e) {
    pt::log_event("error", "data_error", {{"message", e.what()}});
    return 2;
  } catch (const std::exception& e) {
    pt::log_event("error", "error", {{"message", e.what()}});
    return 2;
  }
  return exit_code;
}
