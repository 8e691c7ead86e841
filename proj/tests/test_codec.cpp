#include <doctest.h>

#include "core/codec.hpp"

using namespace anic;

TEST_CASE("latent shape contract") {
    CHECK(latent_shape(81, 480, 832) == std::array<int64_t, 3>{21, 60, 104});
    CHECK(latent_shape(1, 8, 8) == std::array<int64_t, 3>{1, 1, 1});
    CHECK(latent_shape(17, 64, 64) == std::array<int64_t, 3>{5, 8, 8});
    CHECK_THROWS_AS(latent_shape(16, 64, 64), invalid_arg_error);
    CHECK_THROWS_AS(latent_shape(17, 60, 64), invalid_arg_error);
    CHECK_THROWS_AS(latent_shape(0, 64, 64), invalid_arg_error);
}

TEST_CASE("lossless round trip is exact") {
    Rng rng(1);
    CodecConfig cfg;
    for (auto dims : std::vector<std::array<int64_t, 3>>{{17, 64, 64}, {5, 16, 24}, {1, 8, 8}}) {
        TensorF v({3, dims[0], dims[1], dims[2]});
        v.fill_uniform(rng, 0.0, 1.0);
        TensorF lat = encode_video(v, cfg);
        auto [Tl, h, w] = latent_shape(dims[0], dims[1], dims[2]);
        CHECK(lat.shape == std::vector<int64_t>{768, Tl, h, w});
        TensorF back = decode_video(lat, cfg);
        CHECK(bit_equal(back, v));
    }
}

TEST_CASE("single-frame encode is the documented shuffle") {
    Rng rng(2);
    TensorF v({3, 1, 8, 8});
    v.fill_uniform(rng, 0.0, 1.0);
    TensorF lat = encode_video(v, CodecConfig{});
    REQUIRE(lat.shape == std::vector<int64_t>{768, 1, 1, 1});
    // group 0 holds four replicated copies of frame 0
    for (int64_t c = 0; c < 3; c++)
        for (int64_t j = 0; j < 4; j++)
            for (int64_t dy = 0; dy < 8; dy++)
                for (int64_t dx = 0; dx < 8; dx++)
                    CHECK(lat.at(((c * 4 + j) * 8 + dy) * 8 + dx, 0, 0, 0) == v.at(c, 0, dy, dx));
}

TEST_CASE("constant video gives time-constant latents") {
    TensorF v = TensorF::full({3, 9, 16, 16}, 0.42f);
    TensorF lat = encode_video(v, CodecConfig{});
    for (int64_t c = 0; c < 768; c++)
        for (int64_t g = 0; g < lat.dim(1); g++)
            for (int64_t i = 0; i < 4; i++)
                CHECK(lat.at(c, g, i / 2, i % 2) == lat.at(c, 0, i / 2, i % 2));
}

TEST_CASE("latent group g only sees pixel frames up to 4g") {
    Rng rng(3);
    TensorF v({3, 13, 16, 16});
    v.fill_uniform(rng, 0.0, 1.0);
    CodecConfig cfg;
    TensorF base = encode_video(v, cfg);
    for (int64_t t : {1, 5, 12}) {
        TensorF pert = v;
        pert.at(1, t, 3, 3) = pert.at(1, t, 3, 3) < 0.5f ? 0.9f : 0.1f;
        TensorF lat = encode_video(pert, cfg);
        for (int64_t g = 0; g < lat.dim(1); g++) {
            bool may_change = 4 * g >= t;
            if (may_change) continue;
            for (int64_t c = 0; c < 768; c++)
                for (int64_t y = 0; y < lat.dim(2); y++)
                    for (int64_t x = 0; x < lat.dim(3); x++)
                        CHECK(lat.at(c, g, y, x) == base.at(c, g, y, x));
        }
    }
}

TEST_CASE("decode handles degenerate and inverse cases") {
    CodecConfig cfg;
    TensorF zero({768, 3, 2, 2});
    TensorF v = decode_video(zero, cfg);
    CHECK(v.shape == std::vector<int64_t>{3, 9, 16, 16});
    for (int64_t i = 0; i < v.numel(); i++) CHECK(v[i] == 0.0f);

    Rng rng(4);
    TensorF lat({768, 2, 2, 2});
    lat.fill_uniform(rng, 0.0, 1.0);
    TensorF once = decode_video(lat, cfg);
    TensorF thrice = decode_video(encode_video(once, cfg), cfg);
    CHECK(bit_equal(once, thrice));

    CHECK_THROWS_AS(decode_video(TensorF({16, 2, 2, 2}), cfg), invalid_arg_error);
}

TEST_CASE("trainable mode keeps the channel contract") {
    Rng rng(5);
    TensorF v({3, 9, 16, 16});
    v.fill_uniform(rng, 0.0, 1.0);
    CodecConfig cfg = CodecConfig::trainable_16(77);
    TensorF lat = encode_video(v, cfg);
    CHECK(lat.shape == std::vector<int64_t>{16, 3, 2, 2});
    CHECK(bit_equal(lat, encode_video(v, cfg)));  // frozen weights are deterministic

    TensorF out = decode_video(lat, cfg);
    CHECK(out.shape == v.shape);
    for (int64_t i = 0; i < out.numel(); i++) {
        CHECK(out[i] >= 0.0f);
        CHECK(out[i] <= 1.0f);
    }

    TensorF lat2 = encode_video(v, CodecConfig::trainable_16(78));
    CHECK(!bit_equal(lat, lat2));

    TensorF bad = v;
    bad[0] = 1.5f;
    CHECK_THROWS_AS(encode_video(bad, cfg), invalid_arg_error);
}
