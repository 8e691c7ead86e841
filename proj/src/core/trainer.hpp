#ifndef __TRAINER_HPP__
#define __TRAINER_HPP__

#include <functional>
#include <string>
#include <vector>

#include "codec.hpp"
#include "composite.hpp"
#include "maskpack.hpp"
#include "model.hpp"
#include "tensorio.hpp"

namespace anic {

// adapter training on synthetic scenes: rectified flow over the joint latent
// [reference] + motion frames, conditioned on the avatar-background video,
// the mesh video and the packed spatially-variant mask.

struct TrainConfig {
    ModelConfig model;  // ctor applies the desk shape (width = c_lat, patch 1)
    double lr = 1e-4;
    double beta1 = 0.9, beta2 = 0.999;
    double weight_decay = 0.01;
    double adam_eps = 1e-8;
    int64_t steps = 2000;
    int64_t batch = 4;
    uint64_t seed = 0;
    std::string loss_mask = "uniform";  // or "body_weighted"
    bool no_avatar_condition = false;   // condition video = pure background
    bool no_mask_strategy = false;      // frame-level mask instead of per-pixel
    int64_t max_scenes = 0;             // 0 = use every sample in the dataset
    int64_t holdout = 0;                // scenes kept out of the training pool
    double soft_mask_sigma = kDefaultSoftMaskSigma;
    double ema_alpha = 0.99;
    double body_weight_gain = 2.0;      // extra loss weight on refined regions

    TrainConfig();
    void validate() const;
};

nlohmann::ordered_json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

// everything the model consumes for one scene, precomputed once
struct SampleLatents {
    TensorF x0;        // encode([reference] + target motion)   [c_lat,T_lat,h,w]
    TensorF cond;      // encode([reference] + condition video) [c_lat,T_lat,h,w]
    TensorF mask;      // packed mask                           [4,T_lat,h,w]
    TensorF cond_pix;  // condition joint clip (appearance tower input) [3,T,H,W]
    TensorF mesh_pix;  // mesh joint clip (structure tower input)       [3,T,H,W]
    TensorF weight;    // loss weight, empty under uniform masking
};

// [3,T,H,W] clip with frame 0 replaced by the reference image
TensorF joint_with_reference(const TensorF& reference, const TensorF& clip);

SampleLatents build_sample_latents(const TrainingSample& s, const TrainConfig& cfg);

struct Dataset {
    std::vector<std::string> ids;
    std::vector<SampleLatents> latents;
    int64_t train_count = 0;  // latents[0..train_count) train, the rest hold out
};

// dataset directory -> samples (u8/f32 tensor files + extras.json ref_index)
std::vector<TrainingSample> load_samples(const std::string& dir,
                                         std::vector<std::string>* ids_out = nullptr,
                                         int64_t max_scenes = 0);

Dataset build_dataset(const std::vector<TrainingSample>& samples,
                      const std::vector<std::string>& ids, const TrainConfig& cfg);

// x_t = (1−t)·x0 + t·eps, target velocity v = eps − x0
struct NoisedPair {
    TensorF x_t, v;
};
NoisedPair add_noise(const TensorF& x0, const TensorF& eps, double t);

struct LossRow {
    int64_t step = 0;
    double loss = 0, ema = 0;
};

struct TrainResult {
    ParamStore params;
    std::vector<LossRow> log;
    double step0_loss = 0, final_ema = 0;
    uint64_t frozen_before = 0, frozen_after = 0;
};

TrainResult train(const Dataset& data, const TrainConfig& cfg,
                  const std::function<void(const LossRow&)>& on_step = {});

// header "step,loss,ema_loss"
void save_loss_csv(const std::string& path, const std::vector<LossRow>& log);

}  // namespace anic

#endif  // __TRAINER_HPP__
