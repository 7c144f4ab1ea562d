"""Near time-optimal planning for a damped double integrator among convex obstacles.

Pipeline: inflate obstacles (:mod:`geometry`), find common tangents
(:mod:`tangents`), search the tangent roadmap (:mod:`roadmap`), then time the
resulting straight/arc path with closed-form bang-bang profiles
(:mod:`velocity`).  :mod:`sim_oracle` holds the independent RK4 checks.
"""

from .errors import PlannerError
from .geometry import InflatedObstacle, Polygon, inflate_polygon, min_inradius
from .roadmap import (PlannedPath, Roadmap, attach_terminals, build_roadmap, count_path_intersections,
                      ellipse_filter, kappa_m, shortest_path)
from .scenario import Scenario, plan_scenario
from .tangents import common_tangents, point_tangents
from .velocity import (ArcConstants, DynParams, SpeedProfile, arc_min_time, arc_speed_cap, sample_trajectory,
                       solve_terminal_speeds, straight_min_time, total_time)

__version__ = "0.1.0"
