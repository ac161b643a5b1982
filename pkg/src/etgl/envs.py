"""Kinematic 2D maze environments and the exploration coverage tracker.

Mazes are axis-aligned wall segments inside a rectangular boundary; an
action is a displacement, and motion stops at the first wall hit. Layouts
live in plain text files (see load_layout) so alternates can be swapped in.
"""

import numpy as np

COLLISION_EPS = 1e-6


def _segment_hits(p, d, walls):
    """Earliest crossing parameter t in (0,1] of p + t*d against the walls."""
    t_min = None
    # plain floats: this runs every step and numpy scalar math is slow
    px, py = float(p[0]), float(p[1])
    dx, dy = float(d[0]), float(d[1])
    for x1, y1, x2, y2 in walls:
        if x1 == x2:  # vertical wall
            if dx == 0.0:
                continue
            t = (x1 - px) / dx
            if 0.0 < t <= 1.0:
                y = py + t * dy
                if min(y1, y2) <= y <= max(y1, y2):
                    if t_min is None or t < t_min:
                        t_min = t
        else:  # horizontal wall
            if dy == 0.0:
                continue
            t = (y1 - py) / dy
            if 0.0 < t <= 1.0:
                x = px + t * dx
                if min(x1, x2) <= x <= max(x1, x2):
                    if t_min is None or t < t_min:
                        t_min = t
    return t_min


class MazeEnv:
    """Deterministic displacement-dynamics maze.

    walls: list of axis-aligned segments (x1, y1, x2, y2)
    bounds/start_region/goal_region: (low, high) pairs of 2d arrays
    reward scheme: step_reward every step, goal_reward on reaching the goal
    """

    def __init__(self, walls, bounds, start_region, goal_region, goal_radius,
                 max_steps, action_box, step_reward, goal_reward, name="maze"):
        self.name = name
        self.walls = [tuple(float(v) for v in w) for w in walls]
        for x1, y1, x2, y2 in self.walls:
            if x1 != x2 and y1 != y2:
                raise ValueError("walls must be axis-aligned")
        self.bounds = (np.asarray(bounds[0], float), np.asarray(bounds[1], float))
        self.start_region = (np.asarray(start_region[0], float),
                             np.asarray(start_region[1], float))
        self.goal_region = (np.asarray(goal_region[0], float),
                            np.asarray(goal_region[1], float))
        for region in (self.start_region, self.goal_region):
            if np.any(region[0] < self.bounds[0]) or np.any(region[1] > self.bounds[1]):
                raise ValueError("start/goal region outside bounds")
        self.goal_radius = float(goal_radius)
        self.max_steps = int(max_steps)
        self.action_box = (np.asarray(action_box[0], float),
                           np.asarray(action_box[1], float))
        self.step_reward = float(step_reward)
        self.goal_reward = float(goal_reward)
        self.state_dim = 2
        self.action_dim = 2
        self._goal = None
        self._t = 0
        # boundary behaves like four walls
        (xlo, ylo), (xhi, yhi) = self.bounds
        self._all_walls = self.walls + [
            (xlo, ylo, xhi, ylo), (xlo, yhi, xhi, yhi),
            (xlo, ylo, xlo, yhi), (xhi, ylo, xhi, yhi)]
        start_c = (self.start_region[0] + self.start_region[1]) / 2
        goal_c = (self.goal_region[0] + self.goal_region[1]) / 2
        if not self._connected(start_c, goal_c):
            raise ValueError("walls disconnect the start region from the goal region")

    # -- dynamics ----------------------------------------------------------

    def model_transition(self, state, action):
        """Pure kinematics: displacement with full stop at the first wall."""
        low, high = self.action_box
        a = np.clip(np.asarray(action, float), low, high)
        p = np.asarray(state, float)
        t = _segment_hits(p, a, self._all_walls)
        if t is not None:
            norm = float(np.linalg.norm(a))
            if norm > 0.0:
                t = max(t - COLLISION_EPS / norm, 0.0)
            nxt = p + t * a
        else:
            nxt = p + a
        eps = COLLISION_EPS
        return np.clip(nxt, self.bounds[0] + eps, self.bounds[1] - eps)

    def reset(self, rng):
        self._t = 0
        state = rng.uniform(self.start_region[0], self.start_region[1])
        self._goal = rng.uniform(self.goal_region[0], self.goal_region[1])
        return state, self._goal

    def is_goal(self, state):
        return float(np.linalg.norm(state - self._goal)) <= self.goal_radius

    def step(self, state, action):
        if self._goal is None:
            raise RuntimeError("call reset() before step()")
        nxt = self.model_transition(state, action)
        self._t += 1
        success = self.is_goal(nxt)
        reward = self.goal_reward if success else self.step_reward
        done = success or self._t >= self.max_steps
        return nxt, reward, done, success

    # -- connectivity / coverage ------------------------------------------

    def _cell_graph(self, cell_size):
        (xlo, ylo), (xhi, yhi) = self.bounds
        nx = int(round((xhi - xlo) / cell_size))
        ny = int(round((yhi - ylo) / cell_size))
        def center(ix, iy):
            return np.array([xlo + (ix + 0.5) * cell_size,
                             ylo + (iy + 0.5) * cell_size])
        def blocked(a, b):
            return _segment_hits(a, b - a, self.walls) is not None
        return nx, ny, center, blocked

    def reachable_cells(self, cell_size):
        """Cells flood-fill reachable from the start region's center."""
        nx, ny, center, blocked = self._cell_graph(cell_size)
        start_c = (self.start_region[0] + self.start_region[1]) / 2
        start = self.cell_of(start_c, cell_size)
        seen = {start}
        stack = [start]
        while stack:
            ix, iy = stack.pop()
            for jx, jy in ((ix + 1, iy), (ix - 1, iy), (ix, iy + 1), (ix, iy - 1)):
                if 0 <= jx < nx and 0 <= jy < ny and (jx, jy) not in seen:
                    if not blocked(center(ix, iy), center(jx, jy)):
                        seen.add((jx, jy))
                        stack.append((jx, jy))
        return seen

    def cell_of(self, state, cell_size):
        (xlo, ylo), (xhi, yhi) = self.bounds
        ix = min(int((state[0] - xlo) / cell_size), int(round((xhi - xlo) / cell_size)) - 1)
        iy = min(int((state[1] - ylo) / cell_size), int(round((yhi - ylo) / cell_size)) - 1)
        return max(ix, 0), max(iy, 0)

    def _connected(self, a, b):
        cell_size = 0.5
        cells = self.reachable_cells(cell_size)
        return self.cell_of(b, cell_size) in cells

    def coverage_grid(self, cell_size=0.5, visit_threshold=3):
        return CoverageGrid(self, cell_size, visit_threshold)


class CoverageGrid:
    """Fraction of reachable cells holding enough distinct visited states.

    States are quantized a factor 8 finer than the cell grid; a cell counts
    as visited once it has accumulated visit_threshold distinct quantized
    states.
    """

    def __init__(self, env, cell_size, visit_threshold):
        self.env = env
        self.cell_size = float(cell_size)
        self.visit_threshold = int(visit_threshold)
        self.reachable = env.reachable_cells(self.cell_size)
        self._states = {}
        self._visited = set()

    def update(self, state):
        cell = self.env.cell_of(state, self.cell_size)
        if cell in self._visited:
            return
        q = self.cell_size / 8.0
        key = (int(state[0] / q), int(state[1] / q))
        bucket = self._states.setdefault(cell, set())
        bucket.add(key)
        if len(bucket) >= self.visit_threshold and cell in self.reachable:
            self._visited.add(cell)
            del self._states[cell]

    def fraction(self):
        return len(self._visited) / len(self.reachable)


# -- layout files ----------------------------------------------------------


def save_layout(env, path):
    """Write the maze to a text file; floats round-trip bit-exactly."""
    def fmt(values):
        return " ".join(repr(float(v)) for v in values)
    lines = ["# maze layout v1"]
    lines.append(f"name {env.name}")
    lines.append("bounds " + fmt([*env.bounds[0], *env.bounds[1]]))
    lines.append("start " + fmt([*env.start_region[0], *env.start_region[1]]))
    lines.append("goal " + fmt([*env.goal_region[0], *env.goal_region[1]]))
    lines.append("goal_radius " + repr(env.goal_radius))
    lines.append(f"max_steps {env.max_steps}")
    lines.append("action_box " + fmt([*env.action_box[0], *env.action_box[1]]))
    lines.append("reward " + fmt([env.step_reward, env.goal_reward]))
    for w in env.walls:
        lines.append("wall " + fmt(w))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def load_layout(path):
    fields = {}
    walls = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, rest = line.partition(" ")
            if key == "wall":
                walls.append([float(v) for v in rest.split()])
            elif key == "name":
                fields["name"] = rest
            elif key == "max_steps":
                fields["max_steps"] = int(rest)
            else:
                fields[key] = [float(v) for v in rest.split()]
    def box(vals):
        return (np.array(vals[:2]), np.array(vals[2:]))
    return MazeEnv(
        walls=walls,
        bounds=box(fields["bounds"]),
        start_region=box(fields["start"]),
        goal_region=box(fields["goal"]),
        goal_radius=fields["goal_radius"][0],
        max_steps=fields["max_steps"],
        action_box=box(fields["action_box"]),
        step_reward=fields["reward"][0],
        goal_reward=fields["reward"][1],
        name=fields.get("name", "maze"),
    )


def builtin_layout_path(name):
    from importlib.resources import files
    p = files("etgl").joinpath(f"layouts/{name}.txt")
    if not p.is_file():
        raise ValueError(f"unknown environment {name!r}")
    return str(p)


def make_env(name):
    """Load one of the shipped mazes: 'wallmaze' or 'umaze'."""
    return load_layout(builtin_layout_path(name))
