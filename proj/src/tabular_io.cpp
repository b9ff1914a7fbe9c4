#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "rlens/reward.hpp"

namespace rlens {

namespace {

// nlohmann reports byte offsets; turn one into a line number for the message.
int line_of_byte(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

void save_tabular(const TabularReward& r, const std::filesystem::path& path) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < r.transitions.size(); ++i) {
    const Transition& t = r.transitions[i];
    if (!std::isfinite(r.values[i])) throw ValidationError("save_tabular: non-finite value");
    entries.push_back({t.s, t.a, t.s_next, r.values[i]});
  }
  nlohmann::json doc = {
      {"width", r.width}, {"height", r.height}, {"gamma", r.gamma}, {"entries", entries}};
  std::ofstream os(path);
  if (!os) throw IoError("save_tabular: cannot open " + path.string());
  os << doc.dump() << "\n";
  if (!os) throw IoError("save_tabular: write failed for " + path.string());
}

TabularReward load_tabular(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("load_tabular: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("load_tabular: " + path.string() + " line " +
                     std::to_string(line_of_byte(text, e.byte)) + ": " + e.what());
  }

  TabularReward r;
  try {
    r.width = doc.at("width").get<int>();
    r.height = doc.at("height").get<int>();
    r.gamma = doc.at("gamma").get<double>();
    if (r.width < 1 || r.height < 1) throw ValidationError("load_tabular: bad dimensions");
    if (!(r.gamma >= 0.0 && r.gamma < 1.0)) throw ValidationError("load_tabular: bad gamma");

    const std::size_t expected = static_cast<std::size_t>(r.width) * r.height * kNumGridActions;
    const auto& entries = doc.at("entries");
    if (!entries.is_array() || entries.size() != expected) {
      throw ValidationError("load_tabular: expected " + std::to_string(expected) +
                            " entries, got " + std::to_string(entries.size()));
    }
    r.transitions.resize(expected);
    r.values.assign(expected, 0.0);
    std::vector<bool> seen(expected, false);
    for (const auto& e : entries) {
      if (!e.is_array() || e.size() != 4) {
        throw ValidationError("load_tabular: entry must be [s, a, s_next, value]");
      }
      const int s = e[0].get<int>();
      const int a = e[1].get<int>();
      const int s_next = e[2].get<int>();
      if (s < 0 || s >= r.width * r.height || a < 0 || a >= kNumGridActions || s_next < 0 ||
          s_next >= r.width * r.height) {
        throw ValidationError("load_tabular: entry index out of range");
      }
      if (!e[3].is_number()) throw ValidationError("load_tabular: non-numeric value");
      const double v = e[3].get<double>();
      if (!std::isfinite(v)) throw ValidationError("load_tabular: non-finite value");
      const std::size_t idx = static_cast<std::size_t>(s) * kNumGridActions + a;
      if (seen[idx]) throw ValidationError("load_tabular: duplicate (s, a) entry");
      seen[idx] = true;
      r.transitions[idx] = {s, a, s_next};
      r.values[idx] = v;
    }
    for (std::size_t i = 0; i < expected; ++i) {
      if (!seen[i]) {
        throw ValidationError("load_tabular: missing entry for state " +
                              std::to_string(i / kNumGridActions) + " action " +
                              std::to_string(i % kNumGridActions));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("load_tabular: " + path.string() + ": " + e.what());
  }
  return r;
}

}  // namespace rlens
