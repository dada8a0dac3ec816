import numpy as np
import pytest

from aoiipoll.channel import LinkModel
from aoiipoll.cli import main
from aoiipoll.engine import SimConfig, run
from aoiipoll.reconstruct import ReconstructionError, hermite_reconstruction, reconstruct_file
from aoiipoll.world import CategorySpec, ScenarioSpec


def test_single_anchor_is_linear_extrapolation():
    t = np.arange(0, 30)
    out = hermite_reconstruction([5], [2.0], [0.3], t)
    assert np.allclose(out, 2.0 + (t - 5) * 0.3)


def test_collinear_anchors_reproduce_the_line():
    u = np.array([0.0, 4.0, 9.0, 20.0])
    t = np.linspace(0, 25, 101)
    out = hermite_reconstruction(u, 1.0 + 0.5 * u, np.full(4, 0.5), t)
    assert np.allclose(out, 1.0 + 0.5 * t)


def test_no_anchor_is_an_error():
    with pytest.raises(ReconstructionError):
        hermite_reconstruction([], [], [], [0.0])


def noiseless_sine_steps(tmp_path):
    spec = ScenarioSpec((CategorySpec(5.0, 200.0, 0.0, 2),), horizon=1000)
    res = run(SimConfig(M=1, horizon=1000, scenario=spec, policy="rr", link=LinkModel(pdr=0.5, r_max=0)))
    path = tmp_path / "steps.csv"
    res.log.write_csv(path)
    return path


def test_offline_spline_beats_online_on_noiseless_sine(tmp_path):
    rec = reconstruct_file(noiseless_sine_steps(tmp_path), 0)
    assert rec["offline_rmse"] < rec["online_rmse"]


def test_absent_node(tmp_path):
    with pytest.raises(ReconstructionError):
        reconstruct_file(noiseless_sine_steps(tmp_path), 7)


def test_cli_reconstruct(tmp_path, capsys):
    steps = noiseless_sine_steps(tmp_path)
    out = tmp_path / "rec.csv"
    assert main(["reconstruct", str(steps), "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,truth,online_estimate,offline_spline"
    assert len(lines) == 1001
    assert main(["reconstruct", str(steps), "9"]) != 0
