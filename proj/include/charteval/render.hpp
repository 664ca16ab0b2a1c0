#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "charteval/chartgen.hpp"

namespace charteval {

class RenderError : public std::runtime_error {
public:
  explicit RenderError(const std::string& what) : std::runtime_error(what) {}
};

/// Every string handed to the text rasterizer, in draw order. Lets
/// tests check that titles, labels, legend entries and bar annotations
/// actually reach the canvas.
struct RenderLog {
  std::vector<std::string> texts;

  bool contains(const std::string& needle) const;
};

struct RenderOptions {
  int width = 800;
  int height = 600;
};

/// Rasterizes the chart to a PNG file. Deterministic for a fixed spec
/// and renderer version. Throws RenderError on non-finite values and
/// on I/O failure.
void render_chart(const ChartSpec& spec, const std::filesystem::path& out_path,
                  const RenderOptions& opts = {}, RenderLog* log = nullptr);

}  // namespace charteval
