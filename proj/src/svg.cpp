#include "cactus/svg.hpp"

#include <cmath>
#include <cstdio>

namespace cactus {

namespace {

std::string num(double v) {
    if (!std::isfinite(v)) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

SvgCanvas::SvgCanvas(double width, double height) : width_(width), height_(height) {}

void SvgCanvas::rect(double x, double y, double w, double h, const std::string& fill,
                     const std::string& css_class) {
    body_ += "<rect";
    if (!css_class.empty()) body_ += " class=\"" + css_class + "\"";
    body_ += " x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
             "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double stroke_width, const std::string& dash) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
             "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             num(stroke_width) + "\"";
    if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
    body_ += "/>\n";
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& points,
                         const std::string& stroke, double stroke_width,
                         const std::string& css_class) {
    body_ += "<polyline";
    if (!css_class.empty()) body_ += " class=\"" + css_class + "\"";
    body_ += " fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(stroke_width) +
             "\" points=\"";
    for (size_t i = 0; i < points.size(); ++i) {
        if (i) body_ += ' ';
        body_ += num(points[i].first) + "," + num(points[i].second);
    }
    body_ += "\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& content, double font_size,
                     const std::string& anchor, const std::string& fill) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(font_size) +
             "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\" fill=\"" + fill +
             "\">" + escape(content) + "</text>\n";
}

void SvgCanvas::circle(double cx, double cy, double r, const std::string& fill) {
    body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
             "\" fill=\"" + fill + "\"/>\n";
}

std::string SvgCanvas::finish() const {
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) +
                      "\" height=\"" + num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " +
                      num(height_) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
           "\" fill=\"#ffffff\"/>\n";
    out += body_;
    out += "</svg>\n";
    return out;
}

} // namespace cactus
