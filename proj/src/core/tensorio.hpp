#ifndef __TENSORIO_HPP__
#define __TENSORIO_HPP__

#include <string>
#include <vector>

#include "tensor.hpp"

namespace anic {

// single-tensor container:
//   "ANIC" | version u32 LE | dtype u8 (0=f32, 1=u8) | ndim u8 | dims u64 LE... | payload
// payload is row-major. u8 payloads are read back as float v/255.
inline constexpr uint32_t kTensorFileVersion = 1;
inline constexpr int kTensorFileMaxDims = 8;

void save_tensor(const std::string& path, const TensorF& t);
void save_tensor_u8(const std::string& path, const TensorF& t);
TensorF load_tensor(const std::string& path);

struct ManifestEntry {
    std::string sample_id;
    std::string role;
    std::string path;   // relative to the manifest's directory
    int64_t frames = 0;
    int64_t height = 0;
    int64_t width = 0;
};

inline const std::vector<std::string>& manifest_roles() {
    static const std::vector<std::string> roles = {
        "target", "background", "avatar", "opacity", "mesh", "bodymask", "reference"};
    return roles;
}

struct Manifest {
    int schema_version = 1;
    std::vector<ManifestEntry> entries;

    static Manifest load(const std::string& path);
    void save(const std::string& path) const;

    const ManifestEntry& find(const std::string& sample_id, const std::string& role) const;
    std::vector<std::string> sample_ids() const;  // unique, sorted
    // every sample must carry every role, with consistent geometry
    void validate_complete() const;
};

}  // namespace anic

#endif  // __TENSORIO_HPP__
