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

/* C interface to the emgtype engine. Every call returns an emg_status;
 * on failure emg_last_error() describes the problem for the calling
 * thread. Objects are opaque and freed with their matching _free call. */

#ifndef EMGTYPE_EMGTYPE_H_
#define EMGTYPE_EMGTYPE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(EMGTYPE_BUILDING_LIBRARY)
#define EMG_API __attribute__((visibility("default")))
#else
#define EMG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  EMG_OK = 0,
  EMG_ERR_USAGE = 1,
  EMG_ERR_DATA = 2,
  EMG_ERR_NUMERIC = 3,
  EMG_ERR_INTERNAL = 4,
} emg_status;

typedef struct emg_session emg_session;
typedef struct emg_model emg_model;
typedef struct emg_lm emg_lm;

EMG_API const char *emg_version(void);
EMG_API const char *emg_last_error(void);
/* Frees strings returned through char** out-parameters. */
EMG_API void emg_string_free(char *s);

/* ---- Sessions ---- */

EMG_API emg_status emg_session_read(const char *path, emg_session **out);
EMG_API emg_status emg_session_write(const emg_session *session, const char *path);
EMG_API void emg_session_free(emg_session *session);

typedef struct {
  const char *participant_id; /* owned by the session */
  const char *session_id;
  const char *split;
  int sample_rate_hz;
  size_t num_samples;
  size_t num_labels;
} emg_session_info;

EMG_API emg_status emg_session_get_info(const emg_session *session, emg_session_info *out);
/* UTF-8 keystrokes of the labels. */
EMG_API emg_status emg_session_labels(const emg_session *session, char **out);

typedef struct {
  double duration_s;
  double lead_in_s;
  double min_gap_ms;
  double max_gap_ms;
  double burst_sigma_ms;
  double amplitude;
  double noise_std;
  const char *alphabet;       /* UTF-8, NULL for the default */
  const char *participant_id; /* NULL for the default */
  const char *session_id;     /* NULL for the default */
  const char *split;          /* NULL for the default */
} emg_sim_params;

EMG_API void emg_sim_params_default(emg_sim_params *params);
EMG_API emg_status emg_simulate(const emg_sim_params *params, uint64_t seed, emg_session **out);

/* ---- Models ---- */

/* Model configuration as JSON for a named preset: baseline, joint_rsg,
 * split_only, splashnet_mini, splashnet. */
EMG_API emg_status emg_preset_config(const char *preset, char **json_out);

EMG_API emg_status emg_model_load(const char *path, emg_model **out);
EMG_API emg_status emg_model_save(const emg_model *model, const char *path);
/* Random weights for a configuration given as JSON. */
EMG_API emg_status emg_model_random(const char *config_json, uint64_t seed, emg_model **out);
/* Hand-set weights that decode sessions simulated over `alphabet`
 * (UTF-8, NULL for the default). */
EMG_API emg_status emg_model_oracle(const char *alphabet, emg_model **out);
EMG_API emg_status emg_model_config(const emg_model *model, char **json_out);
EMG_API void emg_model_free(emg_model *model);

EMG_API emg_status emg_count_params(const char *config_json, uint64_t *out);

typedef enum { EMG_FLOPS_ENGINE = 0, EMG_FLOPS_REFERENCE = 1 } emg_flop_convention;

typedef struct {
  size_t input_frames;
  uint64_t macs;
  double gflops;
} emg_flops;

EMG_API emg_status emg_count_flops(const char *config_json, double seconds,
                                   emg_flop_convention convention, emg_flops *out);

/* ---- Language model ---- */

EMG_API emg_status emg_lm_load(const char *path, emg_lm **out);
EMG_API void emg_lm_free(emg_lm *lm);

typedef struct {
  int order;
  size_t counts[8]; /* entries per order, first min(order, 8) used */
  size_t num_warnings;
  double max_context_mass;
} emg_lm_info;

EMG_API emg_status emg_lm_get_info(const emg_lm *lm, emg_lm_info *out);
EMG_API emg_status emg_lm_warning(const emg_lm *lm, size_t index, char **out);
/* log10 P(next | context); both UTF-8, `next` a single character. */
EMG_API emg_status emg_lm_score(const emg_lm *lm, const char *context, const char *next,
                                double *out);

/* ---- Decoding ---- */

typedef struct {
  size_t beam_size;
  double lm_weight;
  double insertion_bonus;
  size_t extension_top_k;
  size_t rtn_warmup_frames;
  size_t rtn_window_frames; /* 0 for cumulative statistics */
  double rtn_epsilon;
  int hann_window;          /* 0 rectangular, 1 Hann */
} emg_decode_params;

EMG_API void emg_decode_params_default(emg_decode_params *params);

typedef struct {
  char *session_id;  /* freed by emg_result_clear */
  char *hypothesis;  /* UTF-8 */
  char *reference;   /* UTF-8, empty when the session has no labels */
  int has_cer;
  size_t substitutions;
  size_t deletions;
  size_t insertions;
  size_t reference_length;
  double cer;        /* percent */
  size_t frames;
  double runtime_s;
} emg_result;

EMG_API void emg_result_clear(emg_result *result);

/* Whole-session decode. `lm` may be NULL for greedy decoding. */
EMG_API emg_status emg_decode(const emg_session *session, const emg_model *model,
                              const emg_lm *lm, const emg_decode_params *params,
                              emg_result *out);
/* Same, but fed through the frame-at-a-time pipeline in chunks of
 * `chunk_samples`. If `max_abs_diff` is non-NULL the batch logits are also
 * computed and the largest absolute difference stored there. */
EMG_API emg_status emg_stream_decode(const emg_session *session, const emg_model *model,
                                     const emg_lm *lm, const emg_decode_params *params,
                                     size_t chunk_samples, emg_result *out,
                                     double *max_abs_diff);

typedef struct {
  size_t substitutions;
  size_t deletions;
  size_t insertions;
  size_t reference_length;
  double cer;
} emg_cer;

EMG_API emg_status emg_eval_cer(const char *reference, const char *hypothesis, emg_cer *out);

/* ---- Augmentation statistics ---- */

typedef struct {
  size_t draws;
  double erased_single_mask;
  double full_width_two_masks;
  double union_erased_two_masks;
  double masked_fraction_all;
  double masked_fraction_gated;
  double masked_fraction_nonzero;
} emg_acm_stats;

/* `preset` is "acm" (the aggressive setting) or "specaugment". */
EMG_API emg_status emg_augment_stats(const char *preset, size_t draws, uint64_t seed,
                                     emg_acm_stats *out);

#ifdef __cplusplus
}
#endif

#endif /* EMGTYPE_EMGTYPE_H_ */
