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

#include "emgtype/emgtype.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "emgtype/augment.hpp"
#include "emgtype/checkpoint.hpp"
#include "emgtype/error.hpp"
#include "emgtype/lm.hpp"
#include "emgtype/metrics.hpp"
#include "emgtype/pipeline.hpp"
#include "emgtype/session.hpp"
#include "emgtype/simulate.hpp"

struct emg_session {
  emgtype::SessionRecord record;
  std::string split;
};

struct emg_model {
  std::shared_ptr<const emgtype::Encoder> encoder;
};

struct emg_lm {
  emgtype::CharLm lm;
};

namespace {

thread_local std::string last_error;

emg_status Fail(emg_status status, const std::string &message) {
  last_error = message;
  return status;
}

template <typename Fn>
emg_status Guard(Fn &&fn) {
  try {
    fn();
    last_error.clear();
    return EMG_OK;
  } catch (const emgtype::Error &e) {
    return Fail(static_cast<emg_status>(e.kind()), e.what());
  } catch (const std::bad_alloc &) {
    return Fail(EMG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return Fail(EMG_ERR_INTERNAL, e.what());
  }
}

void Require(bool ok, const char *what) {
  if (!ok) emgtype::ThrowUsage(std::string(what) + " must not be NULL");
}

char *Dup(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

emgtype::ModelConfig ConfigArg(const char *json) {
  Require(json, "config");
  try {
    return emgtype::ConfigFromJson(json);
  } catch (const emgtype::Error &e) {
    emgtype::ThrowUsage(e.what());
  }
}

emgtype::PipelineConfig PipelineArg(const emg_decode_params *p) {
  emg_decode_params d;
  emg_decode_params_default(&d);
  if (!p) p = &d;
  emgtype::PipelineConfig c;
  c.decode.beam_size = p->beam_size;
  c.decode.lm_weight = p->lm_weight;
  c.decode.insertion_bonus = p->insertion_bonus;
  c.decode.extension_top_k = p->extension_top_k;
  c.rtn.warmup_frames = p->rtn_warmup_frames;
  c.rtn.window_frames = p->rtn_window_frames;
  c.rtn.epsilon = p->rtn_epsilon;
  c.stft.window = p->hann_window ? emgtype::WindowFunction::kHann
                                 : emgtype::WindowFunction::kRectangular;
  c.decode.Validate();
  c.rtn.Validate();
  return c;
}

void FillResult(const emgtype::PipelineResult &r, emg_result *out) {
  emg_result res{};
  res.session_id = Dup(r.session_id);
  res.hypothesis = Dup(emgtype::ToUtf8(r.hypothesis));
  res.reference = Dup(emgtype::ToUtf8(r.reference));
  res.has_cer = r.cer.has_value();
  if (r.cer) {
    res.substitutions = r.cer->substitutions;
    res.deletions = r.cer->deletions;
    res.insertions = r.cer->insertions;
    res.reference_length = r.cer->reference_length;
    res.cer = r.cer->cer;
  }
  res.frames = r.frames;
  res.runtime_s = r.runtime_seconds;
  *out = res;
}

}  // namespace

extern "C" {

const char *emg_version(void) { return "1.0.0"; }

const char *emg_last_error(void) { return last_error.c_str(); }

void emg_string_free(char *s) { std::free(s); }

emg_status emg_session_read(const char *path, emg_session **out) {
  return Guard([&] {
    Require(path && out, "path and out");
    auto s = std::make_unique<emg_session>();
    s->record = emgtype::ReadSession(path);
    s->split = emgtype::SplitName(s->record.split);
    *out = s.release();
  });
}

emg_status emg_session_write(const emg_session *session, const char *path) {
  return Guard([&] {
    Require(session && path, "session and path");
    emgtype::WriteSession(session->record, path);
  });
}

void emg_session_free(emg_session *session) { delete session; }

emg_status emg_session_get_info(const emg_session *session, emg_session_info *out) {
  return Guard([&] {
    Require(session && out, "session and out");
    out->participant_id = session->record.participant_id.c_str();
    out->session_id = session->record.session_id.c_str();
    out->split = session->split.c_str();
    out->sample_rate_hz = session->record.sample_rate_hz;
    out->num_samples = session->record.num_samples();
    out->num_labels = session->record.labels.size();
  });
}

emg_status emg_session_labels(const emg_session *session, char **out) {
  return Guard([&] {
    Require(session && out, "session and out");
    *out = Dup(emgtype::ToUtf8(session->record.LabelKeys()));
  });
}

void emg_sim_params_default(emg_sim_params *params) {
  if (!params) return;
  const emgtype::SimulationSpec d;
  *params = emg_sim_params{};
  params->duration_s = d.duration_s;
  params->lead_in_s = d.lead_in_s;
  params->min_gap_ms = d.min_gap_ms;
  params->max_gap_ms = d.max_gap_ms;
  params->burst_sigma_ms = d.burst_sigma_ms;
  params->amplitude = d.amplitude;
  params->noise_std = d.noise_std;
}

emg_status emg_simulate(const emg_sim_params *params, uint64_t seed, emg_session **out) {
  return Guard([&] {
    Require(out, "out");
    emgtype::SimulationSpec spec;
    if (params) {
      spec.duration_s = params->duration_s;
      spec.lead_in_s = params->lead_in_s;
      spec.min_gap_ms = params->min_gap_ms;
      spec.max_gap_ms = params->max_gap_ms;
      spec.burst_sigma_ms = params->burst_sigma_ms;
      spec.amplitude = params->amplitude;
      spec.noise_std = params->noise_std;
      if (params->alphabet) spec.alphabet = emgtype::FromUtf8(params->alphabet);
      if (params->participant_id) spec.participant_id = params->participant_id;
      if (params->session_id) spec.session_id = params->session_id;
      if (params->split) spec.split = emgtype::ParseSplit(params->split);
    }
    auto s = std::make_unique<emg_session>();
    s->record = emgtype::SimulateSession(spec, seed);
    s->split = emgtype::SplitName(s->record.split);
    *out = s.release();
  });
}

emg_status emg_preset_config(const char *preset, char **json_out) {
  return Guard([&] {
    Require(preset && json_out, "preset and json_out");
    *json_out = Dup(emgtype::ConfigToJson(emgtype::ModelConfig::Preset(preset)));
  });
}

emg_status emg_model_load(const char *path, emg_model **out) {
  return Guard([&] {
    Require(path && out, "path and out");
    emgtype::Checkpoint ckpt = emgtype::LoadCheckpoint(path);
    auto m = std::make_unique<emg_model>();
    m->encoder = std::make_shared<const emgtype::Encoder>(ckpt.config, std::move(ckpt.weights));
    *out = m.release();
  });
}

emg_status emg_model_save(const emg_model *model, const char *path) {
  return Guard([&] {
    Require(model && path, "model and path");
    emgtype::SaveCheckpoint(model->encoder->config(), model->encoder->weights(), path);
  });
}

emg_status emg_model_random(const char *config_json, uint64_t seed, emg_model **out) {
  return Guard([&] {
    Require(out, "out");
    const emgtype::ModelConfig config = ConfigArg(config_json);
    auto m = std::make_unique<emg_model>();
    m->encoder =
        std::make_shared<const emgtype::Encoder>(config, emgtype::RandomWeights(config, seed));
    *out = m.release();
  });
}

emg_status emg_model_oracle(const char *alphabet, emg_model **out) {
  return Guard([&] {
    Require(out, "out");
    const emgtype::Keystrokes keys =
        alphabet ? emgtype::FromUtf8(alphabet) : emgtype::SimulationSpec{}.alphabet;
    emgtype::Checkpoint ckpt = emgtype::OracleCheckpoint(keys);
    auto m = std::make_unique<emg_model>();
    m->encoder = std::make_shared<const emgtype::Encoder>(ckpt.config, std::move(ckpt.weights));
    *out = m.release();
  });
}

emg_status emg_model_config(const emg_model *model, char **json_out) {
  return Guard([&] {
    Require(model && json_out, "model and json_out");
    *json_out = Dup(emgtype::ConfigToJson(model->encoder->config()));
  });
}

void emg_model_free(emg_model *model) { delete model; }

emg_status emg_count_params(const char *config_json, uint64_t *out) {
  return Guard([&] {
    Require(out, "out");
    *out = emgtype::CountParams(ConfigArg(config_json));
  });
}

emg_status emg_count_flops(const char *config_json, double seconds,
                           emg_flop_convention convention, emg_flops *out) {
  return Guard([&] {
    Require(out, "out");
    if (!(seconds > 0) || !std::isfinite(seconds))
      emgtype::ThrowUsage("input duration must be positive");
    const auto report = emgtype::CountFlops(ConfigArg(config_json), seconds,
                                            convention == EMG_FLOPS_REFERENCE
                                                ? emgtype::FlopConvention::kReference
                                                : emgtype::FlopConvention::kEngine);
    out->input_frames = report.input_frames;
    out->macs = report.macs;
    out->gflops = report.gflops();
  });
}

emg_status emg_lm_load(const char *path, emg_lm **out) {
  return Guard([&] {
    Require(path && out, "path and out");
    *out = new emg_lm{emgtype::CharLm::Load(path)};
  });
}

void emg_lm_free(emg_lm *lm) { delete lm; }

emg_status emg_lm_get_info(const emg_lm *lm, emg_lm_info *out) {
  return Guard([&] {
    Require(lm && out, "lm and out");
    *out = emg_lm_info{};
    out->order = lm->lm.order();
    const auto counts = lm->lm.counts();
    for (std::size_t i = 0; i < counts.size() && i < 8; ++i) out->counts[i] = counts[i];
    out->num_warnings = lm->lm.warnings().size();
    out->max_context_mass = lm->lm.MaxContextMass();
  });
}

emg_status emg_lm_warning(const emg_lm *lm, size_t index, char **out) {
  return Guard([&] {
    Require(lm && out, "lm and out");
    if (index >= lm->lm.warnings().size()) emgtype::ThrowUsage("warning index out of range");
    *out = Dup(lm->lm.warnings()[index]);
  });
}

emg_status emg_lm_score(const emg_lm *lm, const char *context, const char *next, double *out) {
  return Guard([&] {
    Require(lm && context && next && out, "lm, context, next and out");
    const auto n = emgtype::FromUtf8(next);
    if (n.size() != 1) emgtype::ThrowUsage("next must be a single character");
    *out = lm->lm.Score(emgtype::FromUtf8(context), n[0]);
  });
}

void emg_decode_params_default(emg_decode_params *params) {
  if (!params) return;
  const emgtype::PipelineConfig d;
  *params = emg_decode_params{};
  params->beam_size = d.decode.beam_size;
  params->lm_weight = d.decode.lm_weight;
  params->insertion_bonus = d.decode.insertion_bonus;
  params->extension_top_k = d.decode.extension_top_k;
  params->rtn_warmup_frames = d.rtn.warmup_frames;
  params->rtn_window_frames = d.rtn.window_frames;
  params->rtn_epsilon = d.rtn.epsilon;
  params->hann_window = 0;
}

void emg_result_clear(emg_result *result) {
  if (!result) return;
  std::free(result->session_id);
  std::free(result->hypothesis);
  std::free(result->reference);
  *result = emg_result{};
}

emg_status emg_decode(const emg_session *session, const emg_model *model, const emg_lm *lm,
                      const emg_decode_params *params, emg_result *out) {
  return Guard([&] {
    Require(session && model && out, "session, model and out");
    const auto r = emgtype::RunPipeline(session->record, *model->encoder, PipelineArg(params),
                                        lm ? &lm->lm : nullptr);
    FillResult(r, out);
  });
}

emg_status emg_stream_decode(const emg_session *session, const emg_model *model,
                             const emg_lm *lm, const emg_decode_params *params,
                             size_t chunk_samples, emg_result *out, double *max_abs_diff) {
  return Guard([&] {
    Require(session && model && out, "session, model and out");
    const auto config = PipelineArg(params);
    const auto r = emgtype::RunStreamingPipeline(session->record, model->encoder, config,
                                                 lm ? &lm->lm : nullptr,
                                                 emgtype::Charset::Default(), chunk_samples);
    if (max_abs_diff) {
      const auto batch = emgtype::SessionLogits(session->record, *model->encoder, config);
      const auto stream =
          emgtype::StreamSessionLogits(session->record, model->encoder, config, chunk_samples);
      if (batch.shape() != stream.shape())
        emgtype::ThrowNumeric("streaming and batch logits differ in shape");
      double diff = 0.0;
      for (std::size_t i = 0; i < batch.size(); ++i)
        diff = std::max(diff, std::abs(batch[i] - stream[i]));
      *max_abs_diff = diff;
    }
    FillResult(r, out);
  });
}

emg_status emg_eval_cer(const char *reference, const char *hypothesis, emg_cer *out) {
  return Guard([&] {
    Require(reference && hypothesis && out, "reference, hypothesis and out");
    const auto b = emgtype::ComputeCer(emgtype::FromUtf8(reference), emgtype::FromUtf8(hypothesis));
    out->substitutions = b.substitutions;
    out->deletions = b.deletions;
    out->insertions = b.insertions;
    out->reference_length = b.reference_length;
    out->cer = b.cer;
  });
}

emg_status emg_augment_stats(const char *preset, size_t draws, uint64_t seed,
                             emg_acm_stats *out) {
  return Guard([&] {
    Require(preset && out, "preset and out");
    emgtype::AcmConfig config;
    if (std::strcmp(preset, "specaugment") == 0)
      config = emgtype::AcmConfig::SpecAugmentPreset();
    else if (std::strcmp(preset, "acm") != 0)
      emgtype::ThrowUsage(std::string("unknown augmentation preset '") + preset + "'");
    if (draws == 0) emgtype::ThrowUsage("draws must be positive");
    const auto s = emgtype::AcmMonteCarlo(config, draws, seed);
    out->draws = s.draws;
    out->erased_single_mask = s.erased_single_mask;
    out->full_width_two_masks = s.full_width_two_masks;
    out->union_erased_two_masks = s.union_erased_two_masks;
    out->masked_fraction_all = s.masked_fraction_all;
    out->masked_fraction_gated = s.masked_fraction_gated;
    out->masked_fraction_nonzero = s.masked_fraction_nonzero;
  });
}

}  // extern "C"
