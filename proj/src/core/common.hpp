#ifndef __COMMON_HPP__
#define __COMMON_HPP__

#include <cstdint>
#include <cstdlib>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>
#include <functional>
#include <algorithm>

namespace anic {

// error taxonomy; the C API maps these onto status codes, the CLI onto exit codes
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct invalid_arg_error : error { using error::error; };
struct io_error : error { using error::error; };
struct not_found_error : error { using error::error; };
struct contract_error : error { using error::error; };

inline int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

// splitmix64 finalizer, used to derive independent seed streams
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) { h ^= c; h *= 0x100000001b3ull; }
    return h;
}

// deterministic RNG. std::mt19937_64 output is specified bit-for-bit by the
// standard; the std:: distributions are not, so uniform/gaussian are done by hand.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // [0, 1), 53-bit resolution
    double uniform() { return (double)(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [lo, hi)
    int64_t uniform_int(int64_t lo, int64_t hi) {
        if (hi <= lo) throw invalid_arg_error("uniform_int: empty range");
        return lo + (int64_t)(uniform() * (double)(hi - lo));
    }

    // Box-Muller; second value cached so consecutive draws come in pairs
    double gaussian() {
        if (have_spare_) { have_spare_ = false; return spare_; }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    float gaussianf() { return (float)gaussian(); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// named sub-stream: same (seed, tag) -> same stream, independent of call order
inline Rng stream(uint64_t seed, std::string_view tag) {
    return Rng(mix64(seed ^ fnv1a(tag)));
}
inline Rng stream(uint64_t seed, uint64_t a, uint64_t b = 0) {
    return Rng(mix64(mix64(seed ^ (a * 0x9e3779b97f4a7c15ull)) ^ b));
}

inline int thread_count() {
    if (const char* env = std::getenv("ANICRAFTER_MINI_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? (int)hc : 1;
}

// chunked parallel map. chunk boundaries depend only on (n, n_threads), and each
// chunk writes a disjoint range, so results are reproducible for a fixed thread
// count. do not use for reductions.
inline void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    int nt = (int)std::min<int64_t>(thread_count(), n);
    if (nt <= 1) { fn(0, n); return; }
    int64_t chunk = ceil_div(n, nt);
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; t++) {
        int64_t b = t * chunk, e = std::min<int64_t>(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    fn(0, std::min<int64_t>(n, chunk));
    for (auto& th : pool) th.join();
}

}  // namespace anic

#endif  // __COMMON_HPP__
