import random

import pytest

from posgraph import Pose, RobotProfile, WorldModel


@pytest.fixture
def profile():
    return RobotProfile()


@pytest.fixture
def open_world():
    """Flat 10 x 8 floor, no obstacles, no gaps."""
    return WorldModel((0.0, 10.0), (0.0, 8.0), (), ())


def make_random_world(rng: random.Random, with_gaps: bool = False) -> WorldModel:
    """A cluttered world for fuzzing: mixed bars, walls and tall blocks."""
    from posgraph import Box, GapRect

    obstacles = []
    for _ in range(rng.randint(3, 6)):
        x0 = rng.uniform(0.5, 8.0)
        y0 = rng.uniform(0.5, 6.0)
        w = rng.uniform(0.3, 1.5)
        d = rng.uniform(0.3, 1.5)
        kind = rng.randrange(3)
        if kind == 0:
            z = (0.7, 1.9)
        elif kind == 1:
            z = (0.0, 2.2)
        else:
            z = (0.0, rng.uniform(0.3, 1.2))
        obstacles.append(Box((x0, min(x0 + w, 9.5)), (y0, min(y0 + d, 7.5)), z))
    gaps = []
    if with_gaps:
        for _ in range(rng.randrange(3)):
            x0 = rng.uniform(0.5, 8.5)
            y0 = rng.uniform(0.5, 6.5)
            gaps.append(GapRect((x0, min(x0 + rng.uniform(0.3, 1.0), 9.5)), (y0, min(y0 + rng.uniform(0.3, 1.0), 7.5))))
    return WorldModel((0.0, 10.0), (0.0, 8.0), tuple(obstacles), tuple(gaps))


def random_pose(rng: random.Random, world: WorldModel, h_max: float = 2.0) -> Pose:
    return Pose(
        rng.uniform(world.bounds_x[0], world.bounds_x[1]),
        rng.uniform(world.bounds_y[0], world.bounds_y[1]),
        rng.uniform(-3.14, 3.14),
        rng.uniform(0.0, h_max),
    )
