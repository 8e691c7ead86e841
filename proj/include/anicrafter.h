#ifndef __ANICRAFTER_H__
#define __ANICRAFTER_H__

/* C interface to the avatar-background video diffusion toolkit.
 *
 * All entry points return anic_status; on failure anic_last_error() describes
 * the problem for the calling thread. Paths are UTF-8, JSON arguments are
 * inline JSON text (never file paths). Worker parallelism is capped by the
 * ANICRAFTER_MINI_THREADS environment variable.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum anic_status {
    ANIC_OK = 0,
    ANIC_INVALID_ARG = 1,
    ANIC_IO = 2,
    ANIC_NOT_FOUND = 3,
    ANIC_CONTRACT = 4,
    ANIC_INTERNAL = 5
} anic_status;

const char* anic_version(void);

/* message for the most recent failing call on this thread; never NULL */
const char* anic_last_error(void);

/* synthesize a scene dataset: tensor files + manifest.json + extras.json.
 * degradation_json / background_mix may be NULL for defaults
 * (background_mix: "hybrid", "dynamic" or "static"). */
anic_status anic_gen_data(const char* out_dir, long long scenes, long long frames,
                          long long height, long long width, unsigned long long seed,
                          const char* degradation_json, const char* background_mix);

/* train adapters on a dataset directory. config_json may be NULL for the
 * desk defaults; the effective config, loss CSV and checkpoint are written
 * under out_dir. */
anic_status anic_train(const char* data_dir, const char* config_json, const char* out_dir);

/* denoise one dataset sample with a trained checkpoint. data_dir may be NULL
 * to reuse the dataset path recorded in the checkpoint. dump_png != 0 also
 * writes 8-bit frames. */
anic_status anic_sample(const char* ckpt_dir, const char* data_dir, const char* sample_id,
                        long long steps, unsigned long long seed, const char* out_dir,
                        int dump_png);

/* score predictions (pred_dir/<id>/video.anict) against dataset ground truth;
 * writes CSV rows sample_id,metric,region,value. */
anic_status anic_eval(const char* pred_dir, const char* data_dir, const char* out_csv);

/* dump mask-strategy visualizations (soft mask, mask videos, packed latent
 * channels) for one sample. */
anic_status anic_inspect_masks(const char* data_dir, const char* sample_id,
                               const char* out_dir);

/* ---- tensor file access (read-only, opaque handle) ---- */

typedef struct anic_tensor anic_tensor;

anic_status anic_tensor_load(const char* path, anic_tensor** out);
/* ndim_inout: in = capacity of dims, out = actual rank */
anic_status anic_tensor_shape(const anic_tensor* t, long long* dims, int* ndim_inout);
anic_status anic_tensor_data(const anic_tensor* t, const float** data, long long* numel);
void anic_tensor_free(anic_tensor* t);

#ifdef __cplusplus
}
#endif

#endif /* __ANICRAFTER_H__ */
