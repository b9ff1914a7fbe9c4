#pragma once

#include <string>
#include <variant>
#include <vector>

#include "rlens/reward.hpp"

namespace rlens {

// Rendering is a pure function of its inputs: no timestamps, fixed float
// formatting, so identical inputs give byte-identical documents.

struct ScaleSpec {
  bool auto_scale = true;
  double min = 0.0;
  double max = 0.0;

  static ScaleSpec Auto() { return {}; }
  static ScaleSpec Shared(double lo, double hi) { return {false, lo, hi}; }
};

// Diverging map anchored at 0: blue for negative, white at zero, red for
// positive. Position on the scale is monotone in the value.
std::string diverging_color(double value, double max_abs);

struct HeatmapGlyph {
  int s = 0;
  int a = 0;
  int s_next = 0;
  double value = 0.0;
  std::string color;
};

struct HeatmapDoc {
  double width_px = 0.0;
  double height_px = 0.0;
  std::string body;  // svg fragment
  std::string csv;   // s_index,a_index,s_next_index,value
  std::vector<HeatmapGlyph> glyphs;  // enumeration order, one per transition
  double scale_min = 0.0;
  double scale_max = 0.0;

  std::string document() const;
};

// One cell per state: the center circle is the stay transition, the four
// edge triangles are the moves leaving the cell.
HeatmapDoc render_grid_heatmap(const TabularReward& r, const GridSpec& spec,
                               const ScaleSpec& scale = ScaleSpec::Auto());

struct TimelineDoc {
  double width_px = 0.0;
  double height_px = 0.0;
  std::string body;
  std::string csv;  // episode,t,value
  int n_separators = 0;
  double y_min = 0.0;
  double y_max = 0.0;

  std::string document() const;
};

// Per-step rewards concatenated across episodes, gray separators between
// episodes, y-range padded 5% beyond the data.
TimelineDoc render_timeline(const std::vector<std::vector<double>>& rewards_per_episode,
                            const std::string& label = "");

using VizDoc = std::variant<HeatmapDoc, TimelineDoc>;

// Rectangular grid of documents with row and column titles, as one standalone
// SVG document.
std::string render_panel(const std::vector<std::vector<VizDoc>>& docs,
                         const std::vector<std::string>& row_titles,
                         const std::vector<std::string>& col_titles);

}  // namespace rlens
