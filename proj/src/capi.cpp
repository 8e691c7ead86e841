#include "anicrafter.h"

#include <string>

#include "core/pipeline.hpp"

namespace {

thread_local std::string g_last_error = "";

anic_status run(const std::function<void()>& body) {
    try {
        body();
        g_last_error.clear();
        return ANIC_OK;
    } catch (const anic::invalid_arg_error& e) {
        g_last_error = e.what();
        return ANIC_INVALID_ARG;
    } catch (const anic::not_found_error& e) {
        g_last_error = e.what();
        return ANIC_NOT_FOUND;
    } catch (const anic::io_error& e) {
        g_last_error = e.what();
        return ANIC_IO;
    } catch (const anic::contract_error& e) {
        g_last_error = e.what();
        return ANIC_CONTRACT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return ANIC_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return ANIC_INTERNAL;
    }
}

anic_status need(const char* what) {
    g_last_error = std::string(what) + " must not be NULL";
    return ANIC_INVALID_ARG;
}

}  // namespace

extern "C" {

const char* anic_version(void) { return "0.1.0"; }

const char* anic_last_error(void) { return g_last_error.c_str(); }

anic_status anic_gen_data(const char* out_dir, long long scenes, long long frames,
                          long long height, long long width, unsigned long long seed,
                          const char* degradation_json, const char* background_mix) {
    if (!out_dir) return need("out_dir");
    return run([&] {
        anic::GenDataConfig cfg;
        cfg.out_dir = out_dir;
        cfg.scenes = scenes;
        cfg.frames = frames;
        cfg.height = height;
        cfg.width = width;
        cfg.seed = seed;
        if (degradation_json)
            cfg.degradation = anic::degradation_from_json_text(degradation_json);
        if (background_mix) cfg.background_mix = background_mix;
        anic::gen_dataset(cfg);
    });
}

anic_status anic_train(const char* data_dir, const char* config_json, const char* out_dir) {
    if (!data_dir) return need("data_dir");
    if (!out_dir) return need("out_dir");
    return run([&] {
        anic::TrainConfig cfg;
        if (config_json) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(config_json);
            } catch (const nlohmann::json::exception& e) {
                throw anic::invalid_arg_error("bad train config JSON: " +
                                              std::string(e.what()));
            }
            cfg = anic::train_config_from_json(j);
        }
        anic::run_train(data_dir, cfg, out_dir);
    });
}

anic_status anic_sample(const char* ckpt_dir, const char* data_dir, const char* sample_id,
                        long long steps, unsigned long long seed, const char* out_dir,
                        int dump_png) {
    if (!ckpt_dir) return need("ckpt_dir");
    if (!sample_id) return need("sample_id");
    if (!out_dir) return need("out_dir");
    return run([&] {
        anic::SampleRunConfig cfg;
        cfg.ckpt_dir = ckpt_dir;
        cfg.sample_id = sample_id;
        cfg.out_dir = out_dir;
        if (data_dir) cfg.data_dir = data_dir;
        cfg.steps = steps;
        cfg.seed = seed;
        cfg.dump_png = dump_png != 0;
        anic::run_sample(cfg);
    });
}

anic_status anic_eval(const char* pred_dir, const char* data_dir, const char* out_csv) {
    if (!pred_dir) return need("pred_dir");
    if (!data_dir) return need("data_dir");
    if (!out_csv) return need("out_csv");
    return run([&] { anic::run_eval(pred_dir, data_dir, out_csv); });
}

anic_status anic_inspect_masks(const char* data_dir, const char* sample_id,
                               const char* out_dir) {
    if (!data_dir) return need("data_dir");
    if (!sample_id) return need("sample_id");
    if (!out_dir) return need("out_dir");
    return run([&] { anic::run_inspect_masks(data_dir, sample_id, out_dir); });
}

struct anic_tensor {
    anic::TensorF t;
};

anic_status anic_tensor_load(const char* path, anic_tensor** out) {
    if (!path) return need("path");
    if (!out) return need("out");
    return run([&] {
        auto* h = new anic_tensor{anic::load_tensor(path)};
        *out = h;
    });
}

anic_status anic_tensor_shape(const anic_tensor* t, long long* dims, int* ndim_inout) {
    if (!t) return need("tensor");
    if (!dims || !ndim_inout) return need("dims/ndim");
    return run([&] {
        int rank = (int)t->t.ndim();
        if (*ndim_inout < rank) throw anic::invalid_arg_error("dims capacity too small");
        for (int i = 0; i < rank; i++) dims[i] = (long long)t->t.dim(i);
        *ndim_inout = rank;
    });
}

anic_status anic_tensor_data(const anic_tensor* t, const float** data, long long* numel) {
    if (!t) return need("tensor");
    if (!data || !numel) return need("data/numel");
    *data = t->t.ptr();
    *numel = (long long)t->t.numel();
    return ANIC_OK;
}

void anic_tensor_free(anic_tensor* t) { delete t; }

}  // extern "C"
