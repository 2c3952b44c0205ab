// Copyright 2026 The emgtype Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end over the C API.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "emgtype/emgtype.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct Failure {
  int code;
  std::string message;
};

int ExitCode(emg_status s) {
  switch (s) {
    case EMG_OK: return kExitOk;
    case EMG_ERR_USAGE: return kExitUsage;
    case EMG_ERR_NUMERIC: return kExitNumeric;
    default: return kExitData;
  }
}

void Check(emg_status s) {
  if (s != EMG_OK) throw Failure{ExitCode(s), emg_last_error()};
}

std::string TakeString(char *s) {
  std::string out = s ? s : "";
  emg_string_free(s);
  return out;
}

using SessionPtr = std::unique_ptr<emg_session, decltype(&emg_session_free)>;
using ModelPtr = std::unique_ptr<emg_model, decltype(&emg_model_free)>;
using LmPtr = std::unique_ptr<emg_lm, decltype(&emg_lm_free)>;

class Output {
 public:
  explicit Output(const std::string &path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw Failure{kExitData, "cannot write '" + path + "'"};
    }
  }
  void Emit(const json &record) { stream() << record.dump() << '\n'; }

 private:
  std::ostream &stream() { return file_.is_open() ? file_ : std::cout; }
  std::ofstream file_;
};

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void ParallelFor(std::size_t n, unsigned jobs, const std::function<void(std::size_t)> &fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();
}

struct ModelSource {
  std::string checkpoint;
  std::string preset;
  std::string model_config;
  bool oracle = false;
  std::string oracle_alphabet;

  void Register(CLI::App *app, bool weights) {
    auto *group = app->add_option_group("model", "Model source (pick one)");
    group->add_option("--checkpoint", checkpoint, "Checkpoint file");
    group->add_option("--preset", preset,
                      "Preset: baseline, joint_rsg, split_only, splashnet_mini, splashnet");
    group->add_option("--model-config", model_config, "Model configuration JSON file");
    if (weights) {
      group->add_flag("--oracle", oracle, "Hand-set weights that read simulated sessions");
      app->add_option("--oracle-alphabet", oracle_alphabet, "Key alphabet for --oracle");
    }
    group->require_option(1);
  }

  std::string ConfigJson() const {
    if (!preset.empty()) {
      char *out = nullptr;
      Check(emg_preset_config(preset.c_str(), &out));
      return TakeString(out);
    }
    if (!model_config.empty()) {
      std::ifstream in(model_config);
      if (!in) throw Failure{kExitUsage, "cannot open '" + model_config + "'"};
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }
    ModelPtr m = Load(0);
    char *out = nullptr;
    Check(emg_model_config(m.get(), &out));
    return TakeString(out);
  }

  ModelPtr Load(std::uint64_t seed) const {
    emg_model *m = nullptr;
    if (!checkpoint.empty()) {
      Check(emg_model_load(checkpoint.c_str(), &m));
    } else if (oracle) {
      Check(emg_model_oracle(oracle_alphabet.empty() ? nullptr : oracle_alphabet.c_str(), &m));
    } else {
      Check(emg_model_random(ConfigJson().c_str(), seed, &m));
    }
    return ModelPtr(m, emg_model_free);
  }
};

struct DecodeOptions {
  ModelSource model;
  std::vector<std::string> sessions;
  std::string lm;
  std::string output;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  emg_decode_params params{};
  std::size_t chunk_samples = 160;
  bool check_batch = false;
  bool hann = false;

  void Register(CLI::App *app, bool streaming) {
    emg_decode_params_default(&params);
    model.Register(app, true);
    app->add_option("sessions", sessions, "Session files")->required();
    app->add_option("--lm", lm, "Character n-gram LM; beam search when given, greedy otherwise");
    app->add_option("--output,-o", output, "Write JSON lines here instead of stdout");
    app->add_option("--jobs,-j", jobs, "Sessions decoded in parallel")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Seed for randomly initialised preset weights");
    app->add_option("--beam", params.beam_size, "Beam size")->check(CLI::PositiveNumber);
    app->add_option("--lm-weight", params.lm_weight, "LM weight");
    app->add_option("--insertion-bonus", params.insertion_bonus, "Per-keystroke bonus");
    app->add_option("--top-k", params.extension_top_k, "Extensions per hypothesis, 0 for all");
    app->add_option("--rtn-warmup", params.rtn_warmup_frames, "RTN warm-up frames");
    app->add_option("--rtn-window", params.rtn_window_frames,
                    "RTN sliding window in frames, 0 for cumulative");
    app->add_option("--rtn-epsilon", params.rtn_epsilon, "RTN variance floor");
    app->add_flag("--hann", hann, "Hann STFT window instead of rectangular");
    if (streaming) {
      app->add_option("--chunk-samples", chunk_samples, "Samples per push")
          ->check(CLI::PositiveNumber);
      app->add_flag("--check-batch", check_batch,
                    "Also run the batch pipeline and report the largest logit difference");
    }
  }
};

json ResultRecord(const std::string &file, const emg_result &r) {
  json j{{"id", r.session_id},
         {"file", file},
         {"hypothesis", r.hypothesis},
         {"reference", r.reference},
         {"frames", r.frames},
         {"runtime_s", r.runtime_s}};
  if (r.has_cer) {
    j["cer"] = r.cer;
    j["substitutions"] = r.substitutions;
    j["deletions"] = r.deletions;
    j["insertions"] = r.insertions;
    j["reference_length"] = r.reference_length;
  } else {
    j["cer"] = nullptr;
  }
  return j;
}

int RunDecode(const DecodeOptions &o, bool streaming) {
  ModelPtr model = o.model.Load(o.seed);
  LmPtr lm(nullptr, emg_lm_free);
  if (!o.lm.empty()) {
    emg_lm *raw = nullptr;
    Check(emg_lm_load(o.lm.c_str(), &raw));
    lm.reset(raw);
  }
  emg_decode_params params = o.params;
  params.hann_window = o.hann ? 1 : 0;

  std::vector<json> records(o.sessions.size());
  std::vector<int> codes(o.sessions.size(), kExitOk);
  ParallelFor(o.sessions.size(), o.jobs, [&](std::size_t i) {
    const std::string &file = o.sessions[i];
    try {
      emg_session *raw = nullptr;
      Check(emg_session_read(file.c_str(), &raw));
      SessionPtr session(raw, emg_session_free);
      emg_result r{};
      double diff = 0.0;
      if (streaming) {
        Check(emg_stream_decode(session.get(), model.get(), lm.get(), &params, o.chunk_samples,
                                &r, o.check_batch ? &diff : nullptr));
      } else {
        Check(emg_decode(session.get(), model.get(), lm.get(), &params, &r));
      }
      records[i] = ResultRecord(file, r);
      if (streaming && o.check_batch) records[i]["max_abs_logit_diff"] = diff;
      emg_result_clear(&r);
    } catch (const Failure &f) {
      records[i] = json{{"file", file}, {"error", f.message}};
      codes[i] = f.code;
    }
  });
  Output out(o.output);
  for (const json &r : records) out.Emit(r);
  int code = kExitOk;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] != kExitOk) std::cerr << o.sessions[i] << ": " << records[i]["error"].get<std::string>() << '\n';
    code = std::max(code, codes[i]);
  }
  return code;
}

struct CerOptions {
  std::string reference, hypothesis, pairs, output;
};

// Pairs file: one "id<TAB>reference<TAB>hypothesis" per line.
int RunEvalCer(const CerOptions &o) {
  std::vector<std::array<std::string, 3>> rows;
  if (!o.pairs.empty()) {
    std::ifstream in(o.pairs);
    if (!in) throw Failure{kExitData, "cannot open '" + o.pairs + "'"};
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
      if (line.empty()) continue;
      const auto a = line.find('\t');
      const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
      if (b == std::string::npos)
        throw Failure{kExitData, o.pairs + ":" + std::to_string(n) + ": expected id, reference and hypothesis separated by tabs"};
      rows.push_back({line.substr(0, a), line.substr(a + 1, b - a - 1), line.substr(b + 1)});
    }
  } else {
    rows.push_back({"cli", o.reference, o.hypothesis});
  }
  Output out(o.output);
  for (const auto &[id, ref, hyp] : rows) {
    emg_cer c{};
    const auto start = std::chrono::steady_clock::now();
    Check(emg_eval_cer(ref.c_str(), hyp.c_str(), &c));
    out.Emit({{"id", id},
              {"cer", c.cer},
              {"substitutions", c.substitutions},
              {"deletions", c.deletions},
              {"insertions", c.insertions},
              {"reference_length", c.reference_length},
              {"runtime_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}});
  }
  return kExitOk;
}

struct SimulateOptions {
  emg_sim_params params{};
  std::string out, out_dir, oracle_checkpoint, alphabet, participant, session_prefix = "synthetic", split;
  std::uint64_t seed = 0;
  std::size_t count = 1;
  unsigned jobs = 1;
};

int RunSimulate(const SimulateOptions &o) {
  if (o.out.empty() == o.out_dir.empty() && o.oracle_checkpoint.empty())
    throw Failure{kExitUsage, "give exactly one of --out or --out-dir"};
  if (!o.out.empty() && o.count != 1) throw Failure{kExitUsage, "--out writes a single session; use --out-dir with --count"};
  if (!o.oracle_checkpoint.empty()) {
    emg_model *m = nullptr;
    Check(emg_model_oracle(o.alphabet.empty() ? nullptr : o.alphabet.c_str(), &m));
    ModelPtr model(m, emg_model_free);
    Check(emg_model_save(model.get(), o.oracle_checkpoint.c_str()));
  }
  if (o.out.empty() && o.out_dir.empty()) return kExitOk;

  std::vector<json> records(o.count);
  std::vector<std::optional<Failure>> failures(o.count);
  ParallelFor(o.count, o.jobs, [&](std::size_t i) {
    try {
      emg_sim_params p = o.params;
      const std::string id = o.count == 1 ? o.session_prefix : o.session_prefix + "-" + std::to_string(i);
      p.session_id = id.c_str();
      p.alphabet = o.alphabet.empty() ? nullptr : o.alphabet.c_str();
      p.participant_id = o.participant.empty() ? nullptr : o.participant.c_str();
      p.split = o.split.empty() ? nullptr : o.split.c_str();
      emg_session *raw = nullptr;
      Check(emg_simulate(&p, o.seed + i, &raw));
      SessionPtr s(raw, emg_session_free);
      const std::string path = o.out.empty() ? o.out_dir + "/" + id + ".emg" : o.out;
      Check(emg_session_write(s.get(), path.c_str()));
      emg_session_info info{};
      Check(emg_session_get_info(s.get(), &info));
      char *labels = nullptr;
      Check(emg_session_labels(s.get(), &labels));
      records[i] = json{{"id", id}, {"file", path}, {"seed", o.seed + i}, {"num_samples", info.num_samples},
                        {"num_labels", info.num_labels}, {"labels", TakeString(labels)}};
    } catch (const Failure &f) {
      failures[i] = f;
    }
  });
  for (const auto &f : failures)
    if (f) throw *f;
  Output out("");
  for (const json &r : records) out.Emit(r);
  return kExitOk;
}

struct LmOptions {
  std::string path;
  std::vector<std::string> queries;
};

// Queries look like "context|next".
int RunLmCheck(const LmOptions &o) {
  emg_lm *raw = nullptr;
  Check(emg_lm_load(o.path.c_str(), &raw));
  LmPtr lm(raw, emg_lm_free);
  emg_lm_info info{};
  Check(emg_lm_get_info(lm.get(), &info));
  json counts = json::array();
  for (int k = 0; k < std::min(info.order, 8); ++k) counts.push_back(info.counts[k]);
  json warnings = json::array();
  for (std::size_t i = 0; i < info.num_warnings; ++i) {
    char *w = nullptr;
    Check(emg_lm_warning(lm.get(), i, &w));
    warnings.push_back(TakeString(w));
  }
  json record{{"file", o.path},
              {"order", info.order},
              {"counts", counts},
              {"warnings", warnings},
              {"max_context_mass", info.max_context_mass}};
  for (const std::string &q : o.queries) {
    const auto bar = q.rfind('|');
    if (bar == std::string::npos) throw Failure{kExitUsage, "query must look like context|next"};
    double score = 0.0;
    Check(emg_lm_score(lm.get(), q.substr(0, bar).c_str(), q.substr(bar + 1).c_str(), &score));
    record["queries"].push_back({{"context", q.substr(0, bar)}, {"next", q.substr(bar + 1)}, {"log10", score}});
  }
  Output("").Emit(record);
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"emgtype: keystroke decoding from two-band wrist EMG"};
  app.set_config("--config", "", "Read options from a TOML or INI file; sections name subcommands");
  app.set_version_flag("--version", std::string(emg_version()));
  app.require_subcommand(1);

  DecodeOptions decode, stream;
  auto *decode_cmd = app.add_subcommand("decode", "Decode whole sessions in one pass");
  decode.Register(decode_cmd, false);
  auto *stream_cmd = app.add_subcommand("stream", "Decode sessions through the frame-at-a-time pipeline");
  stream.Register(stream_cmd, true);

  CerOptions cer;
  auto *cer_cmd = app.add_subcommand("eval-cer", "Character error rate between keystroke strings");
  cer_cmd->add_option("--reference,-r", cer.reference, "Reference keystrokes (UTF-8)");
  cer_cmd->add_option("--hypothesis,-y", cer.hypothesis, "Hypothesis keystrokes (UTF-8)");
  cer_cmd->add_option("--pairs", cer.pairs, "TSV file of id, reference, hypothesis")->excludes("--reference", "--hypothesis");
  cer_cmd->add_option("--output,-o", cer.output, "Write JSON lines here instead of stdout");

  ModelSource flops_model, params_model;
  double seconds = 30.0;
  std::string convention = "engine";
  auto *flops_cmd = app.add_subcommand("flops", "Analytic multiply-accumulate count");
  flops_model.Register(flops_cmd, false);
  flops_cmd->add_option("--seconds", seconds, "Input duration")->check(CLI::PositiveNumber);
  flops_cmd->add_option("--convention", convention, "engine (causal, padded) or reference (valid convs)")
      ->check(CLI::IsMember({"engine", "reference"}));
  auto *params_cmd = app.add_subcommand("params", "Parameter count, shared tensors once");
  params_model.Register(params_cmd, false);

  std::string aug_preset = "acm";
  std::size_t draws = 1000000;
  std::uint64_t aug_seed = 0;
  auto *aug_cmd = app.add_subcommand("augment-stats", "Monte-Carlo masking statistics");
  aug_cmd->add_option("--preset", aug_preset, "acm or specaugment")->check(CLI::IsMember({"acm", "specaugment"}));
  aug_cmd->add_option("--draws", draws, "Monte-Carlo draws")->check(CLI::PositiveNumber);
  aug_cmd->add_option("--seed", aug_seed, "Random seed");

  SimulateOptions sim;
  emg_sim_params_default(&sim.params);
  auto *sim_cmd = app.add_subcommand("simulate", "Generate synthetic sessions");
  sim_cmd->add_option("--out", sim.out, "Output session file");
  sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory for --count sessions")->check(CLI::ExistingDirectory);
  sim_cmd->add_option("--count", sim.count, "Number of sessions")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Random seed; session i uses seed + i");
  sim_cmd->add_option("--jobs,-j", sim.jobs, "Sessions generated in parallel")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--duration", sim.params.duration_s, "Seconds")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--lead-in", sim.params.lead_in_s, "Seconds before the first key");
  sim_cmd->add_option("--min-gap-ms", sim.params.min_gap_ms, "Shortest gap between keys");
  sim_cmd->add_option("--max-gap-ms", sim.params.max_gap_ms, "Longest gap between keys");
  sim_cmd->add_option("--burst-sigma-ms", sim.params.burst_sigma_ms, "Burst envelope width");
  sim_cmd->add_option("--amplitude", sim.params.amplitude, "Burst amplitude");
  sim_cmd->add_option("--noise", sim.params.noise_std, "White noise standard deviation");
  sim_cmd->add_option("--alphabet", sim.alphabet, "Keys to draw from (UTF-8)");
  sim_cmd->add_option("--participant", sim.participant, "Participant id");
  sim_cmd->add_option("--session-id", sim.session_prefix, "Session id, or prefix with --count");
  sim_cmd->add_option("--split", sim.split, "Split tag");
  sim_cmd->add_option("--oracle-checkpoint", sim.oracle_checkpoint,
                      "Also write hand-set weights that decode these sessions");

  LmOptions lm;
  auto *lm_cmd = app.add_subcommand("lm-check", "Parse and summarise a character LM");
  lm_cmd->add_option("lm", lm.path, "LM file")->required();
  lm_cmd->add_option("--query", lm.queries, "Score 'context|next'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*decode_cmd) return RunDecode(decode, false);
    if (*stream_cmd) return RunDecode(stream, true);
    if (*cer_cmd) {
      if (cer.pairs.empty() && (!cer_cmd->count("--reference") || !cer_cmd->count("--hypothesis")))
        throw Failure{kExitUsage, "give --reference and --hypothesis, or --pairs"};
      return RunEvalCer(cer);
    }
    if (*flops_cmd) {
      emg_flops f{};
      const std::string config = flops_model.ConfigJson();
      Check(emg_count_flops(config.c_str(), seconds,
                            convention == "reference" ? EMG_FLOPS_REFERENCE : EMG_FLOPS_ENGINE, &f));
      Output("").Emit({{"model", json::parse(config)},
                       {"seconds", seconds},
                       {"convention", convention},
                       {"input_frames", f.input_frames},
                       {"macs", f.macs},
                       {"gflops", f.gflops}});
      return kExitOk;
    }
    if (*params_cmd) {
      std::uint64_t n = 0;
      const std::string config = params_model.ConfigJson();
      Check(emg_count_params(config.c_str(), &n));
      Output("").Emit({{"model", json::parse(config)}, {"params", n}});
      return kExitOk;
    }
    if (*aug_cmd) {
      emg_acm_stats s{};
      Check(emg_augment_stats(aug_preset.c_str(), draws, aug_seed, &s));
      Output("").Emit({{"preset", aug_preset},
                       {"seed", aug_seed},
                       {"draws", s.draws},
                       {"erased_single_mask", s.erased_single_mask},
                       {"full_width_two_masks", s.full_width_two_masks},
                       {"union_erased_two_masks", s.union_erased_two_masks},
                       {"masked_fraction_all", s.masked_fraction_all},
                       {"masked_fraction_gated", s.masked_fraction_gated},
                       {"masked_fraction_nonzero", s.masked_fraction_nonzero}});
      return kExitOk;
    }
    if (*sim_cmd) return RunSimulate(sim);
    if (*lm_cmd) return RunLmCheck(lm);
  } catch (const Failure &f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const json::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
