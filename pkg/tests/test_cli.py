import numpy as np
import pytest

from detsft.bucketing import SampleSet
from detsft.cli import main
from detsft.recovery import SparseApproximation
from detsft.signals import read_signal, write_signal

from conftest import random_spectrum, to_time


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Schedule, filter and a 2-sparse-plus-tail signal at n=64."""
    d = tmp_path_factory.mktemp("cli")
    assert main(["schedule", "build", "--n", "64", "--k", "2", "--mode", "derandomized",
                 "--out", str(d / "s.txt"), "--filter-out", str(d / "g.txt")]) == 0
    x_hat = random_spectrum(np.random.default_rng(0), 64, 2, tail_l1=0.5)
    write_signal(d / "x.c128", to_time(x_hat))
    return d


def test_schedule_verify(workdir):
    assert main(["schedule", "verify", "--schedule", str(workdir / "s.txt")]) == 0
    assert main(["schedule", "verify", "--schedule", str(workdir / "s.txt"), "--filter", str(workdir / "g.txt")]) == 0


def test_tampered_schedule_fails(workdir, tmp_path):
    text = (workdir / "s.txt").read_text().splitlines()
    i = next(j for j, line in enumerate(text) if line and line[0].isdigit())
    parts = text[i].split()
    parts[0] = str(int(parts[0]) + 2)
    text[i] = " ".join(parts)
    (tmp_path / "bad.txt").write_text("\n".join(text) + "\n")
    assert main(["schedule", "verify", "--schedule", str(tmp_path / "bad.txt")]) == 1


@pytest.mark.parametrize("pipeline", ["linear", "sublinear"])
def test_recover_and_verify(workdir, pipeline, capsys):
    out = workdir / f"z-{pipeline}.txt"
    args = ["recover", "--pipeline", pipeline, "--schedule", str(workdir / "s.txt"), "--signal",
            str(workdir / "x.c128"), "--k", "2", "--mu", "0.25", "--snr-bound", "1e4", "--out", str(out)]
    assert main(args) == 0
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first
    assert main(["verify", "guarantee", "--signal", str(workdir / "x.c128"), "--estimate", str(out), "--k", "2"]) == 0
    assert "linf_pass 1" in capsys.readouterr().out


def test_sample_server_mode(workdir):
    samples = workdir / "S.txt"
    assert main(["samples", "--schedule", str(workdir / "s.txt"), "--out", str(samples)]) == 0
    out = workdir / "z-server.txt"
    base = ["recover", "--schedule", str(workdir / "s.txt"), "--signal", str(workdir / "x.c128"), "--k", "2",
            "--mu", "0.25", "--snr-bound", "1e4", "--out", str(out), "--samples", str(samples)]
    assert main(base) == 0
    assert SparseApproximation.load(out).entries == SparseApproximation.load(workdir / "z-linear.txt").entries
    n, idx = SampleSet.load_indices(samples)
    SampleSet(n, idx[::2], []).save(workdir / "S-half.txt")
    base[-1] = str(workdir / "S-half.txt")
    assert main(base) == 1


def test_guarantee_failure_exit(workdir, tmp_path):
    SparseApproximation(64, {}).save(tmp_path / "zero.txt")
    assert main(["verify", "guarantee", "--signal", str(workdir / "x.c128"),
                 "--estimate", str(tmp_path / "zero.txt"), "--k", "2"]) == 1


def test_forge_subgroup(tmp_path, capsys):
    assert main(["forge", "subgroup", "--p", "13", "--order", "6", "--out", str(tmp_path / "r.txt")]) == 0
    assert "1 3 4 9 10 12" in capsys.readouterr().out
    first = (tmp_path / "r.txt").read_bytes()
    main(["forge", "subgroup", "--p", "13", "--order", "6", "--out", str(tmp_path / "r.txt")])
    assert (tmp_path / "r.txt").read_bytes() == first


@pytest.mark.parametrize("argv", [
    ["forge", "gauss", "--p", "101"],
    ["forge", "weyl", "--p", "101", "--degree", "2", "--rows", "16"],
    ["forge", "weyl", "--p", "101", "--degree", "2", "--rows", "16", "--coeffs", "1,0,3"],
    ["forge", "subsample", "--n", "64", "--k", "2"],
])
def test_forge_commands(argv):
    assert main(argv) == 0


def test_filter_command(tmp_path):
    assert main(["filter", "--n", "64", "--B", "8", "--out", str(tmp_path / "g.txt")]) == 0


@pytest.mark.parametrize("argv", [
    [],
    ["schedule"],
    ["schedule", "build", "--n", "64"],
    ["schedule", "build", "--n", "48", "--k", "2", "--out", "x"],
    ["forge", "subgroup", "--p", "13", "--order", "5"],
    ["forge", "gauss", "--p", "15"],
    ["recover", "--schedule", "missing.txt", "--signal", "x", "--k", "1", "--mu", "1", "--snr-bound", "10", "--out", "o"],
    ["recover", "--schedule", "s", "--signal", "x", "--k", "1", "--mu", "-1", "--snr-bound", "10", "--out", "o"],
])
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2


def test_forge_subsample_infeasible():
    assert main(["forge", "subsample", "--n", "16", "--k", "4"]) == 1


def test_signal_formats_round_trip(tmp_path):
    x = np.arange(8) + 1j * np.arange(8)[::-1]
    for name in ("a.c128", "a.c64", "a.csv"):
        write_signal(tmp_path / name, x)
        np.testing.assert_allclose(read_signal(tmp_path / name), x, rtol=1e-6)
    # unknown extensions are read as raw complex128
    write_signal(tmp_path / "a.bin", x)
    np.testing.assert_array_equal(read_signal(tmp_path / "a.bin"), x)
    with pytest.raises(ValueError):
        read_signal(tmp_path / "a.bin", "f32")
