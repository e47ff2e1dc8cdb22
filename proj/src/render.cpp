// SPDX-License-Identifier: Apache-2.0
#include "layoutprior/render.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>

namespace layoutprior {

namespace {

constexpr std::array<const char*, 20> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
    "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896",
    "#c5b0d5", "#c49c94", "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Shortest round-trippable form is overkill for pixels; two decimals suffice
// and keep the output byte-stable.
std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string class_color(std::string_view class_name) {
  return kPalette[fnv1a(class_name) % kPalette.size()];
}

std::string render_svg(const LayoutDocument& layout, const ClassVocabulary& vocabulary) {
  const std::string w = num(layout.width);
  const std::string h = num(layout.height);
  const double font = std::max(10.0, layout.height / 80.0);
  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h +
         "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
  svg += "  <title>" + escape_xml(layout.id) + "</title>\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h +
         "\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  for (const auto& c : layout.components) {
    const std::string& name = vocabulary.name(c.class_id);
    const std::string color = class_color(name);
    const BBox& b = c.bbox;
    svg += "  <g class=\"component\">\n";
    svg += "    <rect x=\"" + num(b.x1) + "\" y=\"" + num(b.y1) + "\" width=\"" + num(b.width()) +
           "\" height=\"" + num(b.height()) + "\" fill=\"" + color +
           "\" fill-opacity=\"0.25\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "    <text x=\"" + num(b.x1 + 2.0) + "\" y=\"" + num(b.y1 + font) + "\" font-family=\"sans-serif\" font-size=\"" +
           num(font) + "\" fill=\"" + color + "\">" + escape_xml(name) + "</text>\n";
    svg += "  </g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace layoutprior
