#include "rlens/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace rlens {

namespace {

std::string fmt(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fmt_csv(double v) {
  if (v == 0.0) v = 0.0;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct Rgb {
  int r, g, b;
};

constexpr Rgb kNegative{33, 102, 172};   // RdBu-style blue
constexpr Rgb kZero{247, 247, 247};
constexpr Rgb kPositive{178, 24, 43};    // RdBu-style red

int lerp_channel(int a, int b, double t) {
  return static_cast<int>(std::lround(a + (b - a) * t));
}

std::string rgb_hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

}  // namespace

std::string diverging_color(double value, double max_abs) {
  const double denom = std::max(max_abs, 1e-12);
  const double t = std::clamp(value / denom, -1.0, 1.0);
  const Rgb& end = t < 0.0 ? kNegative : kPositive;
  const double a = std::abs(t);
  return rgb_hex({lerp_channel(kZero.r, end.r, a), lerp_channel(kZero.g, end.g, a),
                  lerp_channel(kZero.b, end.b, a)});
}

std::string HeatmapDoc::document() const {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width_px) +
                    "\" height=\"" + fmt(height_px) + "\" viewBox=\"0 0 " + fmt(width_px) + " " +
                    fmt(height_px) + "\">\n";
  out += body;
  out += "</svg>\n";
  return out;
}

HeatmapDoc render_grid_heatmap(const TabularReward& r, const GridSpec& spec,
                               const ScaleSpec& scale) {
  spec.validate();
  if (r.width != spec.width || r.height != spec.height) {
    throw InputError("render_grid_heatmap: table does not match the grid");
  }
  const std::size_t expected = static_cast<std::size_t>(spec.num_transitions());
  if (r.values.size() != expected || r.transitions.size() != expected) {
    throw InputError("render_grid_heatmap: incomplete reward table");
  }

  double max_abs;
  if (scale.auto_scale) {
    max_abs = 0.0;
    for (double v : r.values) max_abs = std::max(max_abs, std::abs(v));
  } else {
    max_abs = std::max(std::abs(scale.min), std::abs(scale.max));
  }

  HeatmapDoc doc;
  doc.scale_min = -max_abs;
  doc.scale_max = max_abs;

  const double cell = 36.0;
  const double margin = 8.0;
  const double legend_h = 42.0;
  doc.width_px = margin * 2 + cell * spec.width;
  doc.height_px = margin * 2 + cell * spec.height + legend_h;

  doc.glyphs.reserve(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    const Transition& t = r.transitions[i];
    doc.glyphs.push_back({t.s, t.a, t.s_next, r.values[i], diverging_color(r.values[i], max_abs)});
  }

  std::string& b = doc.body;
  b += "<rect x=\"0\" y=\"0\" width=\"" + fmt(doc.width_px) + "\" height=\"" +
       fmt(doc.height_px) + "\" fill=\"#ffffff\"/>\n";

  std::string csv = "s_index,a_index,s_next_index,value\n";
  for (std::size_t i = 0; i < expected; ++i) {
    const Transition& t = r.transitions[i];
    csv += std::to_string(t.s) + "," + std::to_string(t.a) + "," + std::to_string(t.s_next) +
           "," + fmt_csv(r.values[i]) + "\n";
  }
  doc.csv = std::move(csv);

  for (int s = 0; s < spec.num_states(); ++s) {
    const Cell c = spec.cell(s);
    const double x0 = margin + cell * c.x;
    const double y0 = margin + cell * (spec.height - 1 - c.y);  // y axis points up
    const double x1 = x0 + cell;
    const double y1 = y0 + cell;
    const double cx = x0 + cell / 2;
    const double cy = y0 + cell / 2;

    auto triangle = [&](int action, double ax, double ay, double bx, double by) {
      b += "<polygon points=\"" + fmt(ax) + "," + fmt(ay) + " " + fmt(bx) + "," + fmt(by) + " " +
           fmt(cx) + "," + fmt(cy) + "\" fill=\"" + doc.glyphs[s * kNumGridActions + action].color +
           "\"/>\n";
    };
    triangle(static_cast<int>(GridAction::Up), x0, y0, x1, y0);
    triangle(static_cast<int>(GridAction::Down), x0, y1, x1, y1);
    triangle(static_cast<int>(GridAction::Left), x0, y0, x0, y1);
    triangle(static_cast<int>(GridAction::Right), x1, y0, x1, y1);
    b += "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"" + fmt(cell * 0.18) +
         "\" fill=\"" + doc.glyphs[s * kNumGridActions + static_cast<int>(GridAction::Stay)].color +
         "\" stroke=\"#999999\" stroke-width=\"0.4\"/>\n";
    b += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(cell) +
         "\" height=\"" + fmt(cell) + "\" fill=\"none\" stroke=\"#777777\" stroke-width=\"0.5\"/>\n";
  }

  // Legend: gradient bar with the scale bounds. Edge-clipped moves render
  // like any other transition (they depict r on the induced self-loop).
  const double ly = margin + cell * spec.height + 14.0;
  const double lw = cell * spec.width - 60.0;
  b += "<defs><linearGradient id=\"scale\" x1=\"0\" y1=\"0\" x2=\"1\" y2=\"0\">";
  for (int i = 0; i <= 10; ++i) {
    const double value = doc.scale_min + (doc.scale_max - doc.scale_min) * i / 10.0;
    b += "<stop offset=\"" + fmt(i * 10.0) + "%\" stop-color=\"" +
         diverging_color(value, max_abs) + "\"/>";
  }
  b += "</linearGradient></defs>\n";
  b += "<rect x=\"" + fmt(margin + 30.0) + "\" y=\"" + fmt(ly) + "\" width=\"" + fmt(lw) +
       "\" height=\"10\" fill=\"url(#scale)\" stroke=\"#777777\" stroke-width=\"0.5\"/>\n";
  b += "<text x=\"" + fmt(margin + 26.0) + "\" y=\"" + fmt(ly + 9.0) +
       "\" font-size=\"9\" font-family=\"sans-serif\" text-anchor=\"end\">" +
       fmt(doc.scale_min) + "</text>\n";
  b += "<text x=\"" + fmt(margin + 34.0 + lw) + "\" y=\"" + fmt(ly + 9.0) +
       "\" font-size=\"9\" font-family=\"sans-serif\">" + fmt(doc.scale_max) + "</text>\n";
  return doc;
}

std::string TimelineDoc::document() const {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width_px) +
                    "\" height=\"" + fmt(height_px) + "\" viewBox=\"0 0 " + fmt(width_px) + " " +
                    fmt(height_px) + "\">\n";
  out += body;
  out += "</svg>\n";
  return out;
}

TimelineDoc render_timeline(const std::vector<std::vector<double>>& rewards_per_episode,
                            const std::string& label) {
  if (rewards_per_episode.empty()) throw InputError("render_timeline: no episodes");
  std::size_t total = 0;
  double lo = 1e300, hi = -1e300;
  for (const auto& ep : rewards_per_episode) {
    if (ep.empty()) throw InputError("render_timeline: empty episode");
    total += ep.size();
    for (double v : ep) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  double pad = (hi - lo) * 0.05;
  if (pad == 0.0) pad = 1.0;

  TimelineDoc doc;
  doc.y_min = lo - pad;
  doc.y_max = hi + pad;
  doc.n_separators = static_cast<int>(rewards_per_episode.size()) - 1;

  const double left = 46.0, right = 10.0, top = 18.0, bottom = 22.0;
  const double plot_w = std::max(240.0, static_cast<double>(total) * 1.5);
  const double plot_h = 120.0;
  doc.width_px = left + plot_w + right;
  doc.height_px = top + plot_h + bottom;

  auto sx = [&](std::size_t i) {
    return left + plot_w * (total > 1 ? static_cast<double>(i) / (total - 1) : 0.5);
  };
  auto sy = [&](double v) {
    return top + plot_h * (1.0 - (v - doc.y_min) / (doc.y_max - doc.y_min));
  };

  std::string& b = doc.body;
  b += "<rect x=\"0\" y=\"0\" width=\"" + fmt(doc.width_px) + "\" height=\"" +
       fmt(doc.height_px) + "\" fill=\"#ffffff\"/>\n";

  // episode separators
  std::size_t cursor = 0;
  for (std::size_t ep = 0; ep + 1 < rewards_per_episode.size(); ++ep) {
    cursor += rewards_per_episode[ep].size();
    const double x = (sx(cursor - 1) + sx(cursor)) / 2.0;
    b += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(x) + "\" y2=\"" +
         fmt(top + plot_h) + "\" stroke=\"#aaaaaa\" stroke-width=\"1\"/>\n";
  }

  b += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"";
  std::string csv = "episode,t,value\n";
  std::size_t i = 0;
  for (std::size_t ep = 0; ep < rewards_per_episode.size(); ++ep) {
    for (std::size_t t = 0; t < rewards_per_episode[ep].size(); ++t, ++i) {
      const double v = rewards_per_episode[ep][t];
      b += fmt(sx(i)) + "," + fmt(sy(v)) + " ";
      csv += std::to_string(ep) + "," + std::to_string(t) + "," + fmt_csv(v) + "\n";
    }
  }
  b += "\"/>\n";
  doc.csv = std::move(csv);

  // axes and bounds
  b += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
       fmt(top + plot_h) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  b += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top + plot_h) + "\" x2=\"" +
       fmt(left + plot_w) + "\" y2=\"" + fmt(top + plot_h) +
       "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  b += "<text x=\"" + fmt(left - 4.0) + "\" y=\"" + fmt(top + 8.0) +
       "\" font-size=\"9\" font-family=\"sans-serif\" text-anchor=\"end\">" + fmt(doc.y_max) +
       "</text>\n";
  b += "<text x=\"" + fmt(left - 4.0) + "\" y=\"" + fmt(top + plot_h) +
       "\" font-size=\"9\" font-family=\"sans-serif\" text-anchor=\"end\">" + fmt(doc.y_min) +
       "</text>\n";
  b += "<text x=\"" + fmt(left + plot_w / 2.0) + "\" y=\"" + fmt(top + plot_h + 16.0) +
       "\" font-size=\"9\" font-family=\"sans-serif\" text-anchor=\"middle\">step</text>\n";
  if (!label.empty()) {
    b += "<text x=\"" + fmt(left + plot_w / 2.0) + "\" y=\"12\" font-size=\"11\" "
         "font-family=\"sans-serif\" text-anchor=\"middle\">" + label + "</text>\n";
  }
  return doc;
}

std::string render_panel(const std::vector<std::vector<VizDoc>>& docs,
                         const std::vector<std::string>& row_titles,
                         const std::vector<std::string>& col_titles) {
  if (docs.empty() || docs.front().empty()) throw InputError("render_panel: empty grid");
  const std::size_t cols = docs.front().size();
  for (const auto& row : docs) {
    if (row.size() != cols) throw InputError("render_panel: ragged grid");
  }
  if (!row_titles.empty() && row_titles.size() != docs.size()) {
    throw InputError("render_panel: row title count mismatch");
  }
  if (!col_titles.empty() && col_titles.size() != cols) {
    throw InputError("render_panel: column title count mismatch");
  }

  auto doc_w = [](const VizDoc& d) {
    return std::visit([](const auto& x) { return x.width_px; }, d);
  };
  auto doc_h = [](const VizDoc& d) {
    return std::visit([](const auto& x) { return x.height_px; }, d);
  };

  std::vector<double> col_w(cols, 0.0), row_h(docs.size(), 0.0);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      col_w[j] = std::max(col_w[j], doc_w(docs[i][j]));
      row_h[i] = std::max(row_h[i], doc_h(docs[i][j]));
    }
  }

  const double title_h = col_titles.empty() ? 8.0 : 26.0;
  const double row_title_w = row_titles.empty() ? 8.0 : 110.0;
  const double gap = 10.0;

  double width = row_title_w + gap;
  for (double w : col_w) width += w + gap;
  double height = title_h + gap;
  for (double h : row_h) height += h + gap;

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) +
                    "\" height=\"" + fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " +
                    fmt(height) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
         "\" fill=\"#ffffff\"/>\n";

  if (!col_titles.empty()) {
    double x = row_title_w + gap;
    for (std::size_t j = 0; j < cols; ++j) {
      out += "<text x=\"" + fmt(x + col_w[j] / 2.0) + "\" y=\"18\" font-size=\"13\" "
             "font-family=\"sans-serif\" text-anchor=\"middle\" font-weight=\"bold\">" +
             col_titles[j] + "</text>\n";
      x += col_w[j] + gap;
    }
  }

  double y = title_h + gap;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!row_titles.empty()) {
      out += "<text x=\"" + fmt(row_title_w - 6.0) + "\" y=\"" + fmt(y + row_h[i] / 2.0) +
             "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"end\">" +
             row_titles[i] + "</text>\n";
    }
    double x = row_title_w + gap;
    for (std::size_t j = 0; j < cols; ++j) {
      const double w = doc_w(docs[i][j]);
      const double h = doc_h(docs[i][j]);
      out += "<svg x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) +
             "\" height=\"" + fmt(h) + "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) + "\">\n";
      out += std::visit([](const auto& d) { return d.body; }, docs[i][j]);
      out += "</svg>\n";
      x += col_w[j] + gap;
    }
    y += row_h[i] + gap;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace rlens
