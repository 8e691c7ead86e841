#include "model.hpp"

#include <filesystem>
#include <fstream>

#include "tensorio.hpp"

namespace fs = std::filesystem;

namespace anic {

nlohmann::ordered_json to_json(const ModelConfig& cfg) {
    return nlohmann::ordered_json{{"depth", cfg.dit.depth},
                                  {"width", cfg.dit.width},
                                  {"heads", cfg.dit.heads},
                                  {"patch", cfg.dit.patch},
                                  {"mlp_ratio", cfg.dit.mlp_ratio},
                                  {"time_width", cfg.dit.time_width},
                                  {"lora_rank", cfg.dit.lora_rank},
                                  {"lora_alpha", cfg.dit.lora_alpha},
                                  {"tower_c1", cfg.tower.c1},
                                  {"tower_c2", cfg.tower.c2},
                                  {"d_cond", cfg.tower.d_cond},
                                  {"c_lat", cfg.c_lat},
                                  {"init_seed", cfg.init_seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j, const ModelConfig& base) {
    ModelConfig cfg = base;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).template get<std::decay_t<decltype(field)>>();
    };
    get("depth", cfg.dit.depth);
    get("width", cfg.dit.width);
    get("heads", cfg.dit.heads);
    get("patch", cfg.dit.patch);
    get("mlp_ratio", cfg.dit.mlp_ratio);
    get("time_width", cfg.dit.time_width);
    get("lora_rank", cfg.dit.lora_rank);
    get("lora_alpha", cfg.dit.lora_alpha);
    get("tower_c1", cfg.tower.c1);
    get("tower_c2", cfg.tower.c2);
    get("d_cond", cfg.tower.d_cond);
    get("c_lat", cfg.c_lat);
    get("init_seed", cfg.init_seed);
    cfg.validate();
    return cfg;
}

void save_checkpoint(const std::string& dir, const ParamStore& ps, const ModelConfig& cfg,
                     const nlohmann::ordered_json& meta) {
    fs::create_directories(fs::path(dir) / "params");
    nlohmann::ordered_json tensors = nlohmann::ordered_json::object();
    for (const auto& [name, par] : ps.params) {
        std::string rel = "params/" + name + ".anict";
        save_tensor((fs::path(dir) / rel).string(), par.value);
        tensors[name] = {{"file", rel}, {"frozen", par.frozen}};
    }
    nlohmann::ordered_json index{{"format", 1},
                                 {"config", to_json(cfg)},
                                 {"meta", meta},
                                 {"tensors", std::move(tensors)}};
    std::ofstream out(fs::path(dir) / "index.json", std::ios::binary);
    if (!out) throw io_error("cannot write checkpoint index in " + dir);
    out << index.dump(2) << "\n";
}

ParamStore load_checkpoint(const std::string& dir, ModelConfig& cfg_out,
                           nlohmann::json* meta_out) {
    fs::path index_path = fs::path(dir) / "index.json";
    std::ifstream in(index_path, std::ios::binary);
    if (!in) throw not_found_error("no checkpoint index at " + index_path.string());
    nlohmann::json index;
    try {
        in >> index;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("bad checkpoint index: " + std::string(e.what()));
    }
    if (!index.contains("format") || index.at("format").get<int>() != 1)
        throw io_error("unsupported checkpoint format");
    cfg_out = model_config_from_json(index.at("config"));
    if (meta_out) *meta_out = index.value("meta", nlohmann::json::object());
    ParamStore ps;
    for (const auto& [name, entry] : index.at("tensors").items()) {
        TensorF t = load_tensor((fs::path(dir) / entry.at("file").get<std::string>()).string());
        ps.params[name] = {std::move(t), entry.at("frozen").get<bool>()};
    }
    return ps;
}

ParamStore lora_merge(const ParamStore& ps, const ModelConfig& cfg) {
    ParamStore out = ps;
    float s = (float)(cfg.dit.lora_alpha / (double)cfg.dit.lora_rank);
    for (const std::string& name : adapted_layers(cfg)) {
        const TensorF& A = ps.at(name + ".lora_a").value;
        const TensorF& B = ps.at(name + ".lora_b").value;
        TensorF& W = out.at(name + ".weight").value;
        gemm<float>(false, false, A.dim(0), B.dim(1), A.dim(1), s, A.ptr(), B.ptr(), 1.0f,
                    W.ptr());
    }
    return out;
}

uint64_t frozen_checksum(const ParamStore& ps) {
    uint64_t h = 0xcbf29ce484222325ull;
    auto fold = [&](std::string_view bytes) {
        for (char c : bytes) {
            h ^= (unsigned char)c;
            h *= 0x100000001b3ull;
        }
    };
    for (const auto& [name, par] : ps.params) {
        if (!par.frozen) continue;
        fold(name);
        fold(std::string_view(reinterpret_cast<const char*>(par.value.ptr()),
                              par.value.numel() * sizeof(float)));
    }
    return h;
}

}  // namespace anic
