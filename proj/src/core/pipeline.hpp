#ifndef __PIPELINE_HPP__
#define __PIPELINE_HPP__

#include <string>

#include "trainer.hpp"

namespace anic {

// subcommand orchestration: everything a front-end needs, file-system in and out.
// every run echoes its effective configuration into the output directory.

struct GenDataConfig {
    std::string out_dir;
    int64_t scenes = 8;
    int64_t frames = 17, height = 64, width = 64;
    uint64_t seed = 0;
    Degradation degradation;
    std::string background_mix = "hybrid";  // hybrid | dynamic | static
    void validate() const;
};

void gen_dataset(const GenDataConfig& cfg);

// {"texture_blur_sigma": s, "appendage_frozen": b, "color_quantization_levels": n}
Degradation degradation_from_json_text(const std::string& text);

// one sample from a dataset directory (tensor roles + extras ref_index)
TrainingSample load_sample(const std::string& dir, const std::string& sample_id);

void run_train(const std::string& data_dir, const TrainConfig& cfg, const std::string& out_dir);

struct SampleRunConfig {
    std::string ckpt_dir;
    std::string sample_id;
    std::string out_dir;
    std::string data_dir;  // empty -> the directory recorded in the checkpoint
    int64_t steps = 30;
    uint64_t seed = 0;
    bool dump_png = true;
};

void run_sample(const SampleRunConfig& cfg);

// pred_dir holds one subdirectory per sample with video.anict (and optionally
// condition.anict, reported as cond_* rows); truth comes from the dataset
void run_eval(const std::string& pred_dir, const std::string& data_dir,
              const std::string& out_csv);

void run_inspect_masks(const std::string& data_dir, const std::string& sample_id,
                       const std::string& out_dir);

}  // namespace anic

#endif  // __PIPELINE_HPP__
