#pragma once

#include <string>
#include <vector>

namespace cactus {

/// Minimal deterministic SVG builder for the static report plots. All
/// coordinates are rendered with two decimals so output bytes are stable.
class SvgCanvas {
public:
    SvgCanvas(double width, double height);

    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& css_class = "");
    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double stroke_width = 1.0, const std::string& dash = "");
    void polyline(const std::vector<std::pair<double, double>>& points,
                  const std::string& stroke, double stroke_width = 1.5,
                  const std::string& css_class = "");
    void text(double x, double y, const std::string& content, double font_size = 11.0,
              const std::string& anchor = "start", const std::string& fill = "#222222");
    void circle(double cx, double cy, double r, const std::string& fill);

    std::string finish() const;

private:
    double width_;
    double height_;
    std::string body_;
};

} // namespace cactus
