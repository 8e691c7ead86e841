#ifndef __METRICS_HPP__
#define __METRICS_HPP__

#include <optional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace anic {

inline constexpr double kPsnrCap = 99.0;

// 10·log10(1/MSE) over all elements, capped at 99 dB; inputs in [0,1]
double psnr(const TensorF& a, const TensorF& b);

// PSNR over pixels where (mask > 0.5) == inside; mask [1,T,H,W] against
// [C,T,H,W] clips. empty selection -> nullopt
std::optional<double> psnr_region(const TensorF& a, const TensorF& b, const TensorF& mask,
                                  bool inside);

// mean local SSIM, 11-tap gaussian window sigma 1.5, K1=0.01 K2=0.03, valid
// window positions only, averaged over channels and frames; clips [C,T,H,W]
double ssim(const TensorF& a, const TensorF& b);

struct RegionReport {
    double psnr_all = 0, ssim_all = 0;
    std::optional<double> psnr_body, psnr_bg;
};

RegionReport region_report(const TensorF& output, const TensorF& truth,
                           const TensorF& body_mask);

struct MetricRow {
    std::string sample_id, metric, region;
    double value = 0;
};

std::vector<MetricRow> report_rows(const std::string& sample_id, const RegionReport& r);

// header "sample_id,metric,region,value"
void save_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows);

}  // namespace anic

#endif  // __METRICS_HPP__
