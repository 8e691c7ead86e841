#include "tensorio.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <algorithm>

#include <json.hpp>

namespace anic {

namespace {

void put_u32le(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; i++) b.push_back((uint8_t)(v >> (8 * i)));
}
void put_u64le(std::vector<uint8_t>& b, uint64_t v) {
    for (int i = 0; i < 8; i++) b.push_back((uint8_t)(v >> (8 * i)));
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open for write: " + path);
    f.write((const char*)bytes.data(), (std::streamsize)bytes.size());
    if (!f) throw io_error("write failed: " + path);
}

std::vector<uint8_t> header_bytes(uint8_t dtype, const std::vector<int64_t>& shape) {
    if (shape.empty()) throw invalid_arg_error("tensor file: zero-dim tensors not supported");
    if ((int)shape.size() > kTensorFileMaxDims)
        throw invalid_arg_error("tensor file: too many dims");
    std::vector<uint8_t> b;
    b.push_back('A'); b.push_back('N'); b.push_back('I'); b.push_back('C');
    put_u32le(b, kTensorFileVersion);
    b.push_back(dtype);
    b.push_back((uint8_t)shape.size());
    for (int64_t d : shape) put_u64le(b, (uint64_t)d);
    return b;
}

}  // namespace

void save_tensor(const std::string& path, const TensorF& t) {
    std::vector<uint8_t> b = header_bytes(0, t.shape);
    size_t off = b.size();
    b.resize(off + sizeof(float) * (size_t)t.numel());
    std::memcpy(b.data() + off, t.ptr(), sizeof(float) * (size_t)t.numel());
    write_file(path, b);
}

void save_tensor_u8(const std::string& path, const TensorF& t) {
    std::vector<uint8_t> b = header_bytes(1, t.shape);
    for (int64_t i = 0; i < t.numel(); i++) {
        float v = std::clamp(t[i], 0.0f, 1.0f);
        b.push_back((uint8_t)std::floor(v * 255.0f + 0.5f));
    }
    write_file(path, b);
}

TensorF load_tensor(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw not_found_error("cannot open tensor file: " + path);
    std::vector<uint8_t> b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    size_t pos = 0;
    auto need = [&](size_t n) {
        if (pos + n > b.size()) throw io_error("truncated tensor file: " + path);
    };
    need(4);
    if (std::memcmp(b.data(), "ANIC", 4) != 0) throw io_error("bad magic: " + path);
    pos = 4;
    need(4);
    uint32_t version = 0;
    for (int i = 0; i < 4; i++) version |= (uint32_t)b[pos + i] << (8 * i);
    pos += 4;
    if (version != kTensorFileVersion) throw io_error("unsupported tensor file version: " + path);
    need(2);
    uint8_t dtype = b[pos++];
    uint8_t ndim = b[pos++];
    if (dtype > 1) throw io_error("unknown dtype: " + path);
    if (ndim == 0 || ndim > kTensorFileMaxDims) throw io_error("bad dim count: " + path);

    std::vector<int64_t> shape(ndim);
    for (int i = 0; i < ndim; i++) {
        need(8);
        uint64_t d = 0;
        for (int k = 0; k < 8; k++) d |= (uint64_t)b[pos + k] << (8 * k);
        pos += 8;
        if (d > (uint64_t)1 << 40) throw io_error("implausible dim: " + path);
        shape[i] = (int64_t)d;
    }

    TensorF t(shape);
    size_t n = (size_t)t.numel();
    if (dtype == 0) {
        need(n * sizeof(float));
        if (pos + n * sizeof(float) != b.size()) throw io_error("payload size mismatch: " + path);
        std::memcpy(t.ptr(), b.data() + pos, n * sizeof(float));
    } else {
        need(n);
        if (pos + n != b.size()) throw io_error("payload size mismatch: " + path);
        for (size_t i = 0; i < n; i++) t[(int64_t)i] = (float)b[pos + i] / 255.0f;
    }
    return t;
}

Manifest Manifest::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw not_found_error("cannot open manifest: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw io_error(std::string("manifest parse error: ") + e.what());
    }
    Manifest m;
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw io_error("manifest: missing schema_version");
    m.schema_version = j["schema_version"].get<int>();
    if (m.schema_version != 1) throw io_error("manifest: unsupported schema_version");
    if (!j.contains("entries") || !j["entries"].is_array())
        throw io_error("manifest: missing entries array");
    const auto& roles = manifest_roles();
    for (const auto& e : j["entries"]) {
        ManifestEntry me;
        for (const char* k : {"sample_id", "role", "path"})
            if (!e.contains(k) || !e[k].is_string())
                throw io_error(std::string("manifest entry: missing field ") + k);
        for (const char* k : {"frames", "height", "width"})
            if (!e.contains(k) || !e[k].is_number_integer())
                throw io_error(std::string("manifest entry: missing field ") + k);
        me.sample_id = e["sample_id"].get<std::string>();
        me.role = e["role"].get<std::string>();
        me.path = e["path"].get<std::string>();
        me.frames = e["frames"].get<int64_t>();
        me.height = e["height"].get<int64_t>();
        me.width = e["width"].get<int64_t>();
        if (std::find(roles.begin(), roles.end(), me.role) == roles.end())
            throw io_error("manifest entry: unknown role " + me.role);
        m.entries.push_back(std::move(me));
    }
    return m;
}

void Manifest::save(const std::string& path) const {
    nlohmann::ordered_json j;
    j["schema_version"] = schema_version;
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        nlohmann::ordered_json je;
        je["sample_id"] = e.sample_id;
        je["role"] = e.role;
        je["path"] = e.path;
        je["frames"] = e.frames;
        je["height"] = e.height;
        je["width"] = e.width;
        j["entries"].push_back(std::move(je));
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw io_error("cannot open for write: " + path);
    f << j.dump(2) << "\n";
}

const ManifestEntry& Manifest::find(const std::string& sample_id, const std::string& role) const {
    for (const auto& e : entries)
        if (e.sample_id == sample_id && e.role == role) return e;
    throw not_found_error("manifest: no entry for " + sample_id + "/" + role);
}

std::vector<std::string> Manifest::sample_ids() const {
    std::set<std::string> ids;
    for (const auto& e : entries) ids.insert(e.sample_id);
    return {ids.begin(), ids.end()};
}

void Manifest::validate_complete() const {
    for (const auto& id : sample_ids()) {
        int64_t h = -1, w = -1, frames = -1;
        for (const auto& role : manifest_roles()) {
            const auto& e = find(id, role);  // throws if missing
            if (h < 0) { h = e.height; w = e.width; }
            if (e.height != h || e.width != w)
                throw contract_error("manifest: inconsistent geometry for " + id);
            if (role == "reference") {
                if (e.frames != 1) throw contract_error("manifest: reference must be 1 frame: " + id);
            } else {
                if (frames < 0) frames = e.frames;
                if (e.frames != frames)
                    throw contract_error("manifest: inconsistent frame count for " + id);
            }
        }
    }
}

}  // namespace anic
