#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "elastolab/field.hpp"

namespace elastolab {

struct EvalPair {
  double estimate = 0.0;  // kPa
  double reference = 0.0;
  std::string label;
};

struct BlandAltman {
  double bias = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
  std::size_t n = 0;
};

struct CorrelationStats {
  double pearson_r = 0.0;
  double spearman_rho = 0.0;
  double ols_slope = 0.0;
  double ols_intercept = 0.0;
  double r_squared = 0.0;
};

/// Mean and sample (n-1) standard deviation over mask-selected pixels.
inline std::pair<double, double> roi_stats(const ScalarField& map, const ScalarField& mask) {
  if (!map.same_shape(mask)) throw std::invalid_argument("map/mask shape mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    if (mask.values[i] != 0.0) {
      sum += map.values[i];
      ++n;
    }
  }
  if (n < 2) throw std::invalid_argument("ROI must select at least 2 pixels");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    if (mask.values[i] != 0.0) {
      const double d = map.values[i] - mean;
      ss += d * d;
    }
  }
  return {mean, std::sqrt(ss / static_cast<double>(n - 1))};
}

namespace stats_detail {

inline std::vector<double> average_ranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw std::invalid_argument("degenerate variance in correlation");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace stats_detail

/// Pearson r, Spearman rho (average-rank ties), and the OLS fit of estimate
/// on reference with its coefficient of determination.
inline CorrelationStats correlations(const std::vector<EvalPair>& pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("need at least 3 pairs");
  std::vector<double> est, ref;
  est.reserve(pairs.size());
  ref.reserve(pairs.size());
  for (const auto& p : pairs) {
    est.push_back(p.estimate);
    ref.push_back(p.reference);
  }
  CorrelationStats out;
  out.pearson_r = stats_detail::pearson(est, ref);
  out.spearman_rho =
      stats_detail::pearson(stats_detail::average_ranks(est), stats_detail::average_ranks(ref));

  const double n = static_cast<double>(pairs.size());
  const double mr = std::accumulate(ref.begin(), ref.end(), 0.0) / n;
  const double me = std::accumulate(est.begin(), est.end(), 0.0) / n;
  double srr = 0.0, sre = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    srr += (ref[i] - mr) * (ref[i] - mr);
    sre += (ref[i] - mr) * (est[i] - me);
  }
  out.ols_slope = sre / srr;
  out.ols_intercept = me - out.ols_slope * mr;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double fit = out.ols_intercept + out.ols_slope * ref[i];
    ss_res += (est[i] - fit) * (est[i] - fit);
    ss_tot += (est[i] - me) * (est[i] - me);
  }
  out.r_squared = 1.0 - ss_res / ss_tot;
  return out;
}

/// Bias and 1.96-sigma limits of agreement of estimate - reference,
/// with the sample (n-1) standard deviation.
inline BlandAltman bland_altman(const std::vector<EvalPair>& pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("need at least 3 pairs");
  double sum = 0.0;
  for (const auto& p : pairs) sum += p.estimate - p.reference;
  const double bias = sum / static_cast<double>(pairs.size());
  double ss = 0.0;
  for (const auto& p : pairs) {
    const double d = p.estimate - p.reference - bias;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(pairs.size() - 1));
  return {bias, bias - 1.96 * sd, bias + 1.96 * sd, pairs.size()};
}

// One evaluation row; correlation/agreement entries are NaN when undefined
// (for example pixelwise stats against a constant ground truth).
struct EvalRow {
  std::string case_id;
  std::string roi_id;
  std::string method_pair;
  std::size_t n = 0;
  double mean_est = 0.0;
  double mean_ref = 0.0;
  double std_est = 0.0;
  double pearson_r = std::numeric_limits<double>::quiet_NaN();
  double spearman_rho = std::numeric_limits<double>::quiet_NaN();
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double ba_bias = std::numeric_limits<double>::quiet_NaN();
  double ba_lo = std::numeric_limits<double>::quiet_NaN();
  double ba_hi = std::numeric_limits<double>::quiet_NaN();
};

struct NamedRoi {
  std::string id;
  ScalarField mask;
};

/// Pixelwise comparison of the three method pairs inside each ROI.
inline std::vector<EvalRow> evaluate_case(const ScalarField& dime_map, const ScalarField& mmdi_map,
                                          const ScalarField& gt_map, const std::vector<NamedRoi>& rois,
                                          const std::string& case_id) {
  if (!dime_map.same_shape(gt_map) || !mmdi_map.same_shape(gt_map))
    throw std::invalid_argument("maps must be co-registered");
  const std::array<std::pair<std::string, std::pair<const ScalarField*, const ScalarField*>>, 3> method_pairs = {
      std::pair{std::string("dime_vs_gt"), std::pair{&dime_map, &gt_map}},
      {std::string("mmdi_vs_gt"), {&mmdi_map, &gt_map}},
      {std::string("dime_vs_mmdi"), {&dime_map, &mmdi_map}},
  };

  std::vector<EvalRow> rows;
  for (const auto& roi : rois) {
    if (!roi.mask.same_shape(gt_map)) throw std::invalid_argument("ROI mask shape mismatch");
    for (const auto& [pair_name, maps] : method_pairs) {
      std::vector<EvalPair> pairs;
      for (std::size_t i = 0; i < gt_map.values.size(); ++i)
        if (roi.mask.values[i] != 0.0)
          pairs.push_back({maps.first->values[i], maps.second->values[i], ""});
      if (pairs.size() < 2) throw std::invalid_argument("ROI selects fewer than 2 pixels");

      EvalRow row;
      row.case_id = case_id;
      row.roi_id = roi.id;
      row.method_pair = pair_name;
      row.n = pairs.size();
      const auto [mean_est, std_est] = roi_stats(*maps.first, roi.mask);
      const auto [mean_ref, std_ref] = roi_stats(*maps.second, roi.mask);
      row.mean_est = mean_est;
      row.mean_ref = mean_ref;
      row.std_est = std_est;
      try {
        const CorrelationStats cs = correlations(pairs);
        row.pearson_r = cs.pearson_r;
        row.spearman_rho = cs.spearman_rho;
        row.slope = cs.ols_slope;
        row.intercept = cs.ols_intercept;
        row.r2 = cs.r_squared;
      } catch (const std::invalid_argument&) {
        // degenerate pixel distribution; leave correlations undefined
      }
      try {
        const BlandAltman ba = bland_altman(pairs);
        row.ba_bias = ba.bias;
        row.ba_lo = ba.loa_low;
        row.ba_hi = ba.loa_high;
      } catch (const std::invalid_argument&) {
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::string eval_csv_header() {
  return "case_id,roi_id,method_pair,n,mean_est,mean_ref,std_est,pearson_r,spearman_rho,slope,"
         "intercept,r2,ba_bias,ba_lo,ba_hi";
}

inline std::string eval_csv_row(const EvalRow& row) {
  auto fmt = [](double v) {
    if (std::isnan(v)) return std::string();
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };
  std::string out = row.case_id + "," + row.roi_id + "," + row.method_pair + "," + std::to_string(row.n);
  for (double v : {row.mean_est, row.mean_ref, row.std_est, row.pearson_r, row.spearman_rho,
                   row.slope, row.intercept, row.r2, row.ba_bias, row.ba_lo, row.ba_hi})
    out += "," + fmt(v);
  return out;
}

// Mask helpers for ROI construction.

inline ScalarField nonzero_support(const ScalarField& map) {
  ScalarField mask(map.height, map.width, map.spacing_mm);
  for (std::size_t i = 0; i < map.values.size(); ++i) mask.values[i] = map.values[i] != 0.0 ? 1.0 : 0.0;
  return mask;
}

/// 4-neighbourhood binary erosion, `iterations` passes. Pixels on the image
/// border erode as if surrounded by zeros.
inline ScalarField erode(const ScalarField& mask, int iterations) {
  ScalarField cur = mask;
  for (int it = 0; it < iterations; ++it) {
    ScalarField next = cur;
    for (int r = 0; r < cur.height; ++r) {
      for (int c = 0; c < cur.width; ++c) {
        if (cur.at(r, c) == 0.0) continue;
        const bool border = r == 0 || c == 0 || r == cur.height - 1 || c == cur.width - 1;
        if (border || cur.at(r - 1, c) == 0.0 || cur.at(r + 1, c) == 0.0 ||
            cur.at(r, c - 1) == 0.0 || cur.at(r, c + 1) == 0.0)
          next.at(r, c) = 0.0;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

inline ScalarField disc_mask(int height, int width, double spacing_mm, double cx_mm, double cy_mm,
                             double radius_mm) {
  ScalarField mask(height, width, spacing_mm);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double dx = c * spacing_mm - cx_mm;
      const double dy = r * spacing_mm - cy_mm;
      if (dx * dx + dy * dy <= radius_mm * radius_mm) mask.at(r, c) = 1.0;
    }
  }
  return mask;
}

}  // namespace elastolab
