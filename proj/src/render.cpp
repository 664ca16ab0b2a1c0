#include "charteval/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace charteval {

namespace {

const std::array<cv::Scalar, 8> kPalette = {
    cv::Scalar(180, 119, 31),  cv::Scalar(14, 127, 255),  cv::Scalar(44, 160, 44),
    cv::Scalar(40, 39, 214),   cv::Scalar(189, 103, 148), cv::Scalar(75, 86, 140),
    cv::Scalar(194, 119, 227), cv::Scalar(127, 127, 127)};

constexpr int kFont = cv::FONT_HERSHEY_SIMPLEX;

struct TextDrawer {
  cv::Mat& canvas;
  RenderLog* log;

  void draw(const std::string& text, cv::Point org, double scale,
            cv::Scalar color = cv::Scalar(0, 0, 0), int thickness = 1) {
    cv::putText(canvas, text, org, kFont, scale, color, thickness, cv::LINE_AA);
    if (log) log->texts.push_back(text);
  }

  void draw_centered(const std::string& text, int cx, int y, double scale, int thickness = 1) {
    int baseline = 0;
    const cv::Size size = cv::getTextSize(text, kFont, scale, thickness, &baseline);
    draw(text, cv::Point(cx - size.width / 2, y), scale, cv::Scalar(0, 0, 0), thickness);
  }
};

struct ValueExtent {
  double lo = 0.0, hi = 0.0;  // always spans zero
};

ValueExtent value_extent(const ChartSpec& spec) {
  ValueExtent ext;
  for (const auto& row : spec.values) {
    if (spec.chart_type == ChartType::Stacked) {
      double pos = 0.0, neg = 0.0;
      for (double v : row) (v >= 0 ? pos : neg) += v;
      ext.hi = std::max(ext.hi, pos);
      ext.lo = std::min(ext.lo, neg);
    } else {
      for (double v : row) {
        ext.hi = std::max(ext.hi, v);
        ext.lo = std::min(ext.lo, v);
      }
    }
  }
  if (ext.hi == ext.lo) ext.hi = ext.lo + 1.0;
  // headroom for annotations
  const double pad = 0.08 * (ext.hi - ext.lo);
  if (ext.hi > 0) ext.hi += pad;
  if (ext.lo < 0) ext.lo -= pad;
  return ext;
}

}  // namespace

bool RenderLog::contains(const std::string& needle) const {
  return std::any_of(texts.begin(), texts.end(),
                     [&](const std::string& t) { return t.find(needle) != std::string::npos; });
}

void render_chart(const ChartSpec& spec, const std::filesystem::path& out_path,
                  const RenderOptions& opts, RenderLog* log) {
  for (const auto& row : spec.values) {
    for (double v : row) {
      if (!std::isfinite(v)) throw RenderError("non-finite value in chart " + spec.id);
    }
  }
  if (spec.values.size() != spec.categories.size()) {
    throw RenderError("values shape does not match categories in chart " + spec.id);
  }

  cv::Mat canvas(opts.height, opts.width, CV_8UC3, cv::Scalar(255, 255, 255));
  TextDrawer text{canvas, log};

  const cv::Rect plot(80, 60, opts.width - 110, opts.height - 130);
  const bool horizontal = spec.orientation == Orientation::Horizontal;
  const std::size_t n_cats = spec.categories.size();
  const std::size_t n_series = spec.series_names.size();
  const ValueExtent ext = value_extent(spec);

  text.draw_centered(spec.title, opts.width / 2, 35, 0.75, 2);

  // axis labels; the value axis follows the orientation
  const std::string& cat_axis = spec.x_label;
  const std::string& val_axis = spec.y_label;
  if (horizontal) {
    text.draw_centered(val_axis, opts.width / 2, opts.height - 15, 0.55);
    text.draw(cat_axis, cv::Point(10, 50), 0.55);
  } else {
    text.draw_centered(cat_axis, opts.width / 2, opts.height - 15, 0.55);
    text.draw(val_axis, cv::Point(10, 50), 0.55);
  }

  cv::rectangle(canvas, plot, cv::Scalar(120, 120, 120), 1);

  // pixel position of a value along the value axis
  auto value_px = [&](double v) -> int {
    const double frac = (v - ext.lo) / (ext.hi - ext.lo);
    if (horizontal) return plot.x + static_cast<int>(std::lround(frac * plot.width));
    return plot.y + plot.height - static_cast<int>(std::lround(frac * plot.height));
  };
  const int zero_px = value_px(0.0);

  // zero line
  if (horizontal) {
    cv::line(canvas, cv::Point(zero_px, plot.y), cv::Point(zero_px, plot.y + plot.height),
             cv::Scalar(90, 90, 90), 1);
  } else {
    cv::line(canvas, cv::Point(plot.x, zero_px), cv::Point(plot.x + plot.width, zero_px),
             cv::Scalar(90, 90, 90), 1);
  }

  const int band = (horizontal ? plot.height : plot.width) / static_cast<int>(n_cats);
  const bool grouped = spec.chart_type == ChartType::Grouped;
  const int slots = grouped ? static_cast<int>(n_series) : 1;
  const int bar_thickness = std::max(2, (band * 7 / 10) / slots);

  auto annotate = [&](double v, int along_px, int value_edge_px) {
    const std::string label = format_value(v);
    if (horizontal) {
      text.draw(label, cv::Point(value_edge_px + (v >= 0 ? 4 : -38), along_px + 4), 0.42);
    } else {
      int baseline = 0;
      const cv::Size size = cv::getTextSize(label, kFont, 0.42, 1, &baseline);
      text.draw(label,
                cv::Point(along_px - size.width / 2, value_edge_px + (v >= 0 ? -4 : 12)), 0.42);
    }
  };

  for (std::size_t c = 0; c < n_cats; ++c) {
    const int band_start = (horizontal ? plot.y : plot.x) + static_cast<int>(c) * band;
    const int band_center = band_start + band / 2;

    double stack_pos = 0.0, stack_neg = 0.0;
    for (std::size_t s = 0; s < n_series; ++s) {
      const double v = spec.values[c][s];
      const cv::Scalar color = kPalette[s % kPalette.size()];

      double base = 0.0, top = v;
      int along;  // center of the bar across the category axis
      if (spec.chart_type == ChartType::Stacked) {
        double& acc = v >= 0 ? stack_pos : stack_neg;
        base = acc;
        top = acc + v;
        acc = top;
        along = band_center;
      } else if (grouped) {
        along = band_start + band * 3 / 20 + static_cast<int>(s) * bar_thickness +
                bar_thickness / 2;
      } else {
        along = band_center;
      }

      const int a0 = value_px(base), a1 = value_px(top);
      cv::Rect bar;
      if (horizontal) {
        bar = cv::Rect(std::min(a0, a1), along - bar_thickness / 2, std::max(1, std::abs(a1 - a0)),
                       bar_thickness);
      } else {
        bar = cv::Rect(along - bar_thickness / 2, std::min(a0, a1), bar_thickness,
                       std::max(1, std::abs(a1 - a0)));
      }
      cv::rectangle(canvas, bar, color, cv::FILLED);
      cv::rectangle(canvas, bar, cv::Scalar(60, 60, 60), 1);

      if (spec.annotate) annotate(v, along, a1);
    }

    // category tick label
    if (horizontal) {
      text.draw(spec.categories[c], cv::Point(6, band_center + 4), 0.42);
    } else {
      text.draw_centered(spec.categories[c], band_center, plot.y + plot.height + 18, 0.42);
    }
  }

  if (n_series > 1) {
    const int lx = plot.x + plot.width - 180, ly = plot.y + 8;
    for (std::size_t s = 0; s < n_series; ++s) {
      const int y = ly + static_cast<int>(s) * 20;
      cv::rectangle(canvas, cv::Rect(lx, y, 14, 12), kPalette[s % kPalette.size()], cv::FILLED);
      text.draw(spec.series_names[s], cv::Point(lx + 20, y + 11), 0.42);
    }
  }

  if (!cv::imwrite(out_path.string(), canvas)) {
    throw RenderError("cannot write image: " + out_path.string());
  }
}

}  // namespace charteval
