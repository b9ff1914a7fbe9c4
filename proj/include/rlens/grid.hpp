#pragma once

#include <array>
#include <utility>
#include <vector>

#include "rlens/errors.hpp"

namespace rlens {

// Action order is fixed; enumeration order and file formats depend on it.
enum class GridAction : int { Stay = 0, Up = 1, Down = 2, Left = 3, Right = 4 };

inline constexpr int kNumGridActions = 5;

inline constexpr std::array<GridAction, kNumGridActions> kGridActions = {
    GridAction::Stay, GridAction::Up, GridAction::Down, GridAction::Left, GridAction::Right};

const char* grid_action_name(GridAction a);

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

// Deterministic gridworld. Coordinates are (x, y) with y increasing upward;
// state indices are row-major: index = y * width + x.
struct GridSpec {
  int width = 10;
  int height = 10;
  Cell goal{9, 9};
  std::vector<Cell> terminal_cells;  // absorbing: every action self-loops
  int horizon = 50;

  int num_states() const { return width * height; }
  int num_transitions() const { return num_states() * kNumGridActions; }
  int state_index(Cell c) const { return c.y * width + c.x; }
  Cell cell(int index) const { return {index % width, index / width}; }
  bool in_bounds(Cell c) const { return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height; }
  bool is_terminal(Cell c) const;

  void validate() const;  // throws InputError
};

// One (state, action, next-state) triple over state indices.
struct Transition {
  int s = 0;
  int a = 0;
  int s_next = 0;
  bool operator==(const Transition&) const = default;
};

// Moves one cell in direction a; off-grid moves clip to the current cell and
// terminal cells absorb. Throws InputError if s is out of bounds.
Cell grid_step(const GridSpec& spec, Cell s, GridAction a);
int grid_step_index(const GridSpec& spec, int s, int a);

// All width*height*5 transitions, state-major then action order. This
// sequence is the support of the uniform tabular distribution.
std::vector<Transition> enumerate_transitions(const GridSpec& spec);

// All consecutive transition pairs ((s,a,s'), (s',a',s'')), width*height*25
// of them, in (s, a, a') order.
std::vector<std::pair<Transition, Transition>> enumerate_adjacent_pairs(const GridSpec& spec);

int manhattan_distance(Cell a, Cell b);

template <typename State, typename Action>
struct Trajectory {
  std::vector<State> states;   // |states| = |actions| + 1
  std::vector<Action> actions;
  bool terminated_at_goal = false;

  std::size_t length() const { return actions.size(); }
};

using GridTrajectory = Trajectory<int, int>;

}  // namespace rlens
