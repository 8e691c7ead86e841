#include "metrics.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace anic {

namespace {

double mse_to_db(double mse, int64_t count) {
    if (count <= 0) throw invalid_arg_error("psnr: empty selection");
    double m = mse / (double)count;
    if (m <= 0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

std::array<double, 11> ssim_window() {
    std::array<double, 11> w{};
    double s = 0;
    for (int i = 0; i < 11; i++) {
        double d = (double)(i - 5);
        w[(size_t)i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        s += w[(size_t)i];
    }
    for (double& v : w) v /= s;
    return w;
}

}  // namespace

double psnr(const TensorF& a, const TensorF& b) {
    if (!a.same_shape(b)) throw invalid_arg_error("psnr: shape mismatch");
    double acc = 0;
    for (int64_t i = 0; i < a.numel(); i++) {
        double d = (double)a[i] - (double)b[i];
        acc += d * d;
    }
    return mse_to_db(acc, a.numel());
}

std::optional<double> psnr_region(const TensorF& a, const TensorF& b, const TensorF& mask,
                                  bool inside) {
    if (!a.same_shape(b)) throw invalid_arg_error("psnr_region: shape mismatch");
    if (a.ndim() != 4 || mask.ndim() != 4 || mask.dim(0) != 1 || mask.dim(1) != a.dim(1) ||
        mask.dim(2) != a.dim(2) || mask.dim(3) != a.dim(3))
        throw invalid_arg_error("psnr_region: mask must be [1,T,H,W] matching the clips");
    int64_t C = a.dim(0), plane = a.dim(1) * a.dim(2) * a.dim(3);
    double acc = 0;
    int64_t count = 0;
    for (int64_t p = 0; p < plane; p++) {
        if ((mask[p] > 0.5f) != inside) continue;
        for (int64_t c = 0; c < C; c++) {
            double d = (double)a[c * plane + p] - (double)b[c * plane + p];
            acc += d * d;
        }
        count += C;
    }
    if (count == 0) return std::nullopt;
    return mse_to_db(acc, count);
}

double ssim(const TensorF& a, const TensorF& b) {
    if (!a.same_shape(b)) throw invalid_arg_error("ssim: shape mismatch");
    if (a.ndim() != 4) throw invalid_arg_error("ssim: expected [C,T,H,W]");
    int64_t C = a.dim(0), T = a.dim(1), H = a.dim(2), W = a.dim(3);
    if (H < 11 || W < 11) throw invalid_arg_error("ssim: frames smaller than the window");
    static const std::array<double, 11> win = ssim_window();
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

    // separable pass: rows then columns, valid positions only
    int64_t Hv = H - 10, Wv = W - 10;
    std::vector<double> rx((size_t)(H * Wv)), ry((size_t)(H * Wv)), rxx((size_t)(H * Wv)),
        ryy((size_t)(H * Wv)), rxy((size_t)(H * Wv));
    double total = 0;
    int64_t planes = 0;
    for (int64_t c = 0; c < C; c++) {
        for (int64_t t = 0; t < T; t++) {
            const float* pa = a.ptr() + (c * T + t) * H * W;
            const float* pb = b.ptr() + (c * T + t) * H * W;
            for (int64_t y = 0; y < H; y++)
                for (int64_t x = 0; x < Wv; x++) {
                    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
                    for (int k = 0; k < 11; k++) {
                        double va = pa[y * W + x + k], vb = pb[y * W + x + k];
                        double wk = win[(size_t)k];
                        sx += wk * va;
                        sy += wk * vb;
                        sxx += wk * va * va;
                        syy += wk * vb * vb;
                        sxy += wk * va * vb;
                    }
                    size_t o = (size_t)(y * Wv + x);
                    rx[o] = sx;
                    ry[o] = sy;
                    rxx[o] = sxx;
                    ryy[o] = syy;
                    rxy[o] = sxy;
                }
            double acc = 0;
            for (int64_t y = 0; y < Hv; y++)
                for (int64_t x = 0; x < Wv; x++) {
                    double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
                    for (int k = 0; k < 11; k++) {
                        size_t o = (size_t)((y + k) * Wv + x);
                        double wk = win[(size_t)k];
                        mx += wk * rx[o];
                        my += wk * ry[o];
                        mxx += wk * rxx[o];
                        myy += wk * ryy[o];
                        mxy += wk * rxy[o];
                    }
                    double vx = mxx - mx * mx, vy = myy - my * my, cov = mxy - mx * my;
                    double num = (2 * mx * my + c1) * (2 * cov + c2);
                    double den = (mx * mx + my * my + c1) * (vx + vy + c2);
                    acc += num / den;
                }
            total += acc / (double)(Hv * Wv);
            planes++;
        }
    }
    return total / (double)planes;
}

RegionReport region_report(const TensorF& output, const TensorF& truth,
                           const TensorF& body_mask) {
    RegionReport r;
    r.psnr_all = psnr(output, truth);
    r.ssim_all = ssim(output, truth);
    r.psnr_body = psnr_region(output, truth, body_mask, true);
    r.psnr_bg = psnr_region(output, truth, body_mask, false);
    return r;
}

std::vector<MetricRow> report_rows(const std::string& sample_id, const RegionReport& r) {
    std::vector<MetricRow> rows;
    rows.push_back({sample_id, "psnr", "all", r.psnr_all});
    if (r.psnr_body) rows.push_back({sample_id, "psnr", "body", *r.psnr_body});
    if (r.psnr_bg) rows.push_back({sample_id, "psnr", "background", *r.psnr_bg});
    rows.push_back({sample_id, "ssim", "all", r.ssim_all});
    return rows;
}

void save_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write metrics: " + path);
    out << "sample_id,metric,region,value\n";
    char buf[64];
    for (const MetricRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.9g", r.value);
        out << r.sample_id << ',' << r.metric << ',' << r.region << ',' << buf << '\n';
    }
    if (!out) throw io_error("failed writing metrics: " + path);
}

}  // namespace anic
