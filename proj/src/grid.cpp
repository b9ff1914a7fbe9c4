#include "rlens/grid.hpp"

#include <algorithm>
#include <string>

namespace rlens {

const char* grid_action_name(GridAction a) {
  switch (a) {
    case GridAction::Stay: return "stay";
    case GridAction::Up: return "up";
    case GridAction::Down: return "down";
    case GridAction::Left: return "left";
    case GridAction::Right: return "right";
  }
  return "?";
}

bool GridSpec::is_terminal(Cell c) const {
  return std::find(terminal_cells.begin(), terminal_cells.end(), c) != terminal_cells.end();
}

void GridSpec::validate() const {
  if (width < 1 || height < 1) throw InputError("grid dimensions must be positive");
  if (horizon < 1) throw InputError("horizon must be >= 1");
  if (!in_bounds(goal)) throw InputError("goal outside grid bounds");
  for (const Cell& c : terminal_cells) {
    if (!in_bounds(c)) throw InputError("terminal cell outside grid bounds");
  }
}

Cell grid_step(const GridSpec& spec, Cell s, GridAction a) {
  if (!spec.in_bounds(s)) {
    throw InputError("grid_step: state (" + std::to_string(s.x) + "," + std::to_string(s.y) +
                     ") out of bounds");
  }
  if (spec.is_terminal(s)) return s;
  Cell next = s;
  switch (a) {
    case GridAction::Stay: break;
    case GridAction::Up: next.y += 1; break;
    case GridAction::Down: next.y -= 1; break;
    case GridAction::Left: next.x -= 1; break;
    case GridAction::Right: next.x += 1; break;
  }
  if (!spec.in_bounds(next)) return s;  // wall clip
  return next;
}

int grid_step_index(const GridSpec& spec, int s, int a) {
  if (s < 0 || s >= spec.num_states()) throw InputError("grid_step: state index out of range");
  if (a < 0 || a >= kNumGridActions) throw InputError("grid_step: action index out of range");
  return spec.state_index(grid_step(spec, spec.cell(s), static_cast<GridAction>(a)));
}

std::vector<Transition> enumerate_transitions(const GridSpec& spec) {
  spec.validate();
  std::vector<Transition> out;
  out.reserve(spec.num_transitions());
  for (int s = 0; s < spec.num_states(); ++s) {
    for (int a = 0; a < kNumGridActions; ++a) {
      out.push_back({s, a, grid_step_index(spec, s, a)});
    }
  }
  return out;
}

std::vector<std::pair<Transition, Transition>> enumerate_adjacent_pairs(const GridSpec& spec) {
  spec.validate();
  std::vector<std::pair<Transition, Transition>> out;
  out.reserve(spec.num_states() * kNumGridActions * kNumGridActions);
  for (int s = 0; s < spec.num_states(); ++s) {
    for (int a = 0; a < kNumGridActions; ++a) {
      const int mid = grid_step_index(spec, s, a);
      for (int a2 = 0; a2 < kNumGridActions; ++a2) {
        out.push_back({{s, a, mid}, {mid, a2, grid_step_index(spec, mid, a2)}});
      }
    }
  }
  return out;
}

int manhattan_distance(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

}  // namespace rlens
