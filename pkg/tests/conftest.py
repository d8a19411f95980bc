import numpy as np
import pytest

from devrank import kernels
from devrank.graph import HeteroNetwork


def random_network(rng, max_d=20, max_p=10, min_commits=1, with_stars=False):
    n_d = int(rng.integers(1, max_d + 1))
    n_p = int(rng.integers(1, max_p + 1))
    follows = rng.integers(0, n_d, size=(int(rng.integers(0, 3 * n_d + 1)), 2))
    m = int(rng.integers(min_commits, 3 * n_d + 2))
    commits = np.column_stack([rng.integers(0, n_d, m), rng.integers(0, n_p, m), rng.integers(1, 10, m)])
    stars = rng.integers(0, [n_d, n_p], size=(int(rng.integers(0, n_d + 1)), 2)) if with_stars else ()
    return HeteroNetwork.build(n_d, n_p, follows, commits, stars)


@pytest.fixture
def jack_net():
    # Jack commits 2x JavaScript and 1x Ruby, Mike 1x JavaScript; Mike and John follow Jack
    return HeteroNetwork.build(
        ["Jack", "John", "Mike"], ["JavaScript", "Ruby"],
        follows=[(2, 0), (1, 0)],
        commits=[(0, 0, 2), (0, 1, 1), (2, 0, 1)],
    )


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    previous = kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(previous)


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(c) for c in r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def csv_inputs(tmp_path):
    """Writer for a (follows, commits, stars[, projects]) file set."""

    def make(follows=(), commits=(), stars=(), projects=None, commit_count=False):
        f = write_csv(tmp_path / "follows.csv", ["follower_id", "followee_id", "date"], follows)
        ch = ["developer_id", "project_id", "date"] + (["count"] if commit_count else [])
        c = write_csv(tmp_path / "commits.csv", ch, commits)
        s = write_csv(tmp_path / "stars.csv", ["developer_id", "project_id", "date"], stars)
        p = None
        if projects is not None:
            p = write_csv(tmp_path / "projects.csv", ["project_id", "name", "forked_from"], projects)
        return f, c, s, p

    return make


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
