import csv
import io
import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from hockeystick import cli
from hockeystick.contraction import choi_min_eigenvalue, eta_depolarizing_closed
from hockeystick.core import (
    amplitude_damping,
    basis_state,
    channel_to_json,
    depolarizing,
    identity_channel,
    maximally_mixed,
    state_to_json,
)
from hockeystick.hypothesis import relax_budget
from hockeystick.privacy import (
    delta_global_depolarizing,
    delta_local_depolarizing,
    delta_qubit_noise,
    eps_global_depolarizing,
    renyi_to_approx_dp,
    RenyiBudget,
    trace_lower_bound_local,
)


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)
    return write


@pytest.fixture
def run(capsys):
    def go(*argv):
        code = cli.main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err
    return go


def _table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def _algo(p_list, dim=2):
    return {"dim": dim, "layers": [{"noise": {"type": "global_depolarizing", "p": p}} for p in p_list]}


class TestDivergence:
    def test_examples(self, files, run):
        z = files("z.json", state_to_json(basis_state(2, 0)))
        o = files("o.json", state_to_json(basis_state(2, 1)))
        m = files("m.json", state_to_json(maximally_mixed(2)))
        assert run("divergence", z, z, "--gamma", 1.5)[1] == "0.000000000000\n"
        code, out, _ = run("divergence", z, m, "--epsilon", 0.2)
        assert code == 0
        assert float(out) == pytest.approx(1 - math.exp(0.2) / 2, abs=1e-12)
        assert out.startswith("0.38929")
        assert run("divergence", z, o, "--gamma", 2)[1] == "1.000000000000\n"

    def test_malformed_json(self, files, run):
        bad = files("bad.json", "{not json")
        good = files("g.json", state_to_json(basis_state(2, 0)))
        code, _, err = run("divergence", bad, good, "--gamma", 1)
        assert code == 2 and "malformed" in err

    def test_missing_field_and_file(self, files, run):
        good = files("g.json", state_to_json(basis_state(2, 0)))
        assert run("divergence", files("x.json", {"dim": 2}), good, "--gamma", 1)[0] == 2
        assert run("divergence", "/nonexistent.json", good, "--gamma", 1)[0] == 2

    def test_gamma_xor_epsilon(self, files, run):
        good = files("g.json", state_to_json(basis_state(2, 0)))
        assert run("divergence", good, good)[0] == 2
        assert run("divergence", good, good, "--gamma", 1, "--epsilon", 0)[0] == 2

    @pytest.mark.parametrize("matrix", [np.diag([0.7, 0.7]), np.diag([1.5, -0.5]), np.array([[0.5, 0.5], [0.0, 0.5]])])
    def test_invariant_violation(self, files, run, matrix):
        good = files("g.json", state_to_json(basis_state(2, 0)))
        bad = files("b.json", state_to_json(matrix))
        assert run("divergence", bad, good, "--gamma", 1)[0] == 3


class TestContraction:
    def test_closed(self, files, run):
        ch = files("d.json", channel_to_json(depolarizing(0.3)))
        code, out, _ = run("contraction", ch, "--gamma", 1, "--method", "closed")
        assert code == 0
        fields = dict(line.split(": ", 1) for line in out.splitlines())
        assert float(fields["lower"]) == pytest.approx(0.7, abs=1e-12)
        assert float(fields["upper"]) == pytest.approx(0.7, abs=1e-12)

    def test_optimize(self, files, run):
        ch = files("d.json", channel_to_json(depolarizing(0.3)))
        _, out, _ = run("contraction", ch, "--gamma", 1, "--method", "optimize", "--restarts", 200)
        fields = dict(line.split(": ", 1) for line in out.splitlines())
        assert float(fields["lower"]) == pytest.approx(0.7, abs=1e-3)

    def test_identity(self, files, run):
        ch = files("i.json", channel_to_json(identity_channel(2)))
        _, out, _ = run("contraction", ch, "--method", "optimize", "--restarts", 5)
        fields = dict(line.split(": ", 1) for line in out.splitlines())
        assert float(fields["lower"]) == pytest.approx(1.0, abs=1e-9)

    def test_closed_on_unstructured(self, files, run):
        ch = files("a.json", channel_to_json(amplitude_damping(0.3)))
        assert run("contraction", ch, "--method", "closed")[0] == 4

    def test_not_trace_preserving(self, files, run):
        obj = channel_to_json(identity_channel(2))
        obj["kraus"][0][0][0] = [2.0, 0.0]
        assert run("contraction", files("n.json", obj), "--method", "optimize")[0] == 3


class TestCertify:
    def test_depolarizing_mode(self, files, run):
        algo = files("a.json", _algo([0.3] * 3))
        code, out, _ = run("certify", algo, "--kappa", 0.1, "--epsilon", 0.1, "--mode", "depolarizing")
        assert code == 0 and out.strip().endswith("delta=0.000000000000")

    def test_generic_mode(self, files, run):
        algo = files("a.json", _algo([0.3] * 3))
        _, out, _ = run("certify", algo, "--kappa", 0.1, "--epsilon", 0.1, "--mode", "generic")
        delta = float(out.split("delta=")[1])
        assert delta == pytest.approx(0.1 * eta_depolarizing_closed(0.3, 2, math.exp(0.1)) ** 3, abs=1e-12)
        assert delta == pytest.approx(0.68422 ** 3 * 0.1, abs=1e-6)

    @pytest.mark.parametrize("mode", ["generic", "depolarizing"])
    def test_kappa_zero(self, files, run, mode):
        algo = files("a.json", _algo([0.01, 0.02]))
        _, out, _ = run("certify", algo, "--kappa", 0, "--epsilon", 0.0, "--mode", mode)
        assert float(out.split("delta=")[1]) == 0.0

    def test_delta_to_epsilon(self, files, run):
        algo = files("a.json", _algo([0.1] * 4))
        _, out, _ = run("certify", algo, "--kappa", 0.5, "--delta", 0.01, "--mode", "depolarizing")
        eps = float(out.split()[0].split("=")[1])
        assert eps == pytest.approx(eps_global_depolarizing([0.1] * 4, 2, 0.5, 0.01), abs=1e-12)
        _, out, _ = run("certify", algo, "--kappa", 0.5, "--delta", 0.01, "--mode", "generic")
        eps_g = float(out.split()[0].split("=")[1])
        # the generic route inverts a looser delta bound, so it needs at least as much epsilon
        assert eps_g >= eps - 1e-9

    def test_qubit_mode(self, files, run):
        ch = amplitude_damping(0.4)
        algo = files("q.json", {"dim": 2, "layers": [{"noise": {"type": "kraus", "channel": channel_to_json(ch)}}] * 3})
        _, out, _ = run("certify", algo, "--kappa", 0.1, "--epsilon", 0.1, "--mode", "qubit")
        expect = delta_qubit_noise(choi_min_eigenvalue(ch), 1, 3, 0.1, 0.1)
        assert float(out.split("delta=")[1]) == pytest.approx(expect, abs=1e-12)

    def test_soundness_refusal(self, files, run):
        algo = files("a.json", _algo([0.3] * 3))
        code, _, err = run("certify", algo, "--kappa", 0.1, "--epsilon", 0.1, "--contraction", "optimized")
        assert code == 5 and "sound" in err

    def test_mode_mismatch(self, files, run):
        obj = {"dim": 2, "layers": [{"noise": {"type": "kraus", "channel": channel_to_json(amplitude_damping(0.2))}}]}
        assert run("certify", files("a.json", obj), "--kappa", 0.1, "--epsilon", 0.1, "--mode", "depolarizing")[0] == 4

    def test_bad_inputs(self, files, run):
        algo = files("a.json", _algo([0.3]))
        assert run("certify", algo, "--kappa", 1.5, "--epsilon", 0.1)[0] == 2
        assert run("certify", algo, "--kappa", 0.1)[0] == 2
        assert run("certify", files("b.json", {"dim": 2}), "--kappa", 0.1, "--epsilon", 0.1)[0] == 2


class TestSweep:
    def test_contraction_delta_vs_n(self, run):
        code, out, _ = run("sweep", "delta_contraction", "--var", "n", "--start", 1, "--stop", 30, "--steps", 30,
                           "--set", "p=0.3", "--set", "kappa=0.1", "--series", "epsilon=0,0.1,0.5")
        assert code == 0
        header, rows = _table(out)
        assert header == ["x", "epsilon=0", "epsilon=0.1", "epsilon=0.5"]
        assert [r[0] for r in rows] == list(range(1, 31))
        for r in rows:
            assert r[1] == pytest.approx(0.7 ** r[0] * 0.1, rel=1e-11)

    def test_contraction_vs_improved_columns(self, run):
        _, out, _ = run("sweep", "delta_contraction,delta_global", "--var", "n", "--start", 1, "--stop", 12,
                        "--steps", 12, "--set", "p=0.1", "--set", "epsilon=0.1", "--set", "kappa=0.1")
        header, rows = _table(out)
        assert header == ["x", "delta_contraction", "delta_global"]
        for r in rows:
            assert r[2] <= r[1] + 1e-15

    def test_two_step_range(self, run):
        _, out, _ = run("sweep", "eta_closed", "--var", "p", "--start", 0, "--stop", 1, "--steps", 2)
        header, rows = _table(out)
        assert len(rows) == 2 and rows[0] == [0.0, 1.0] and rows[1] == [1.0, 0.0]

    @pytest.mark.parametrize("rng", [(1, 1, 2), (2, 1, 5), (0, 1, 1)])
    def test_invalid_range(self, run, rng):
        start, stop, steps = rng
        assert run("sweep", "eta_closed", "--var", "p", "--start", start, "--stop", stop, "--steps", steps)[0] == 2

    def test_unknown_names(self, run):
        assert run("sweep", "nope", "--var", "p", "--start", 0, "--stop", 1, "--steps", 2)[0] == 2
        assert run("sweep", "eta_closed", "--var", "zz", "--start", 0, "--stop", 1, "--steps", 2)[0] == 2
        assert run("sweep", "delta_global", "--var", "n", "--start", 1, "--stop", 2, "--steps", 3)[0] == 2

    def test_twelve_significant_digits(self, run):
        _, out, _ = run("sweep", "eta_closed", "--var", "p", "--start", 0, "--stop", 1, "--steps", 4,
                        "--set", "gamma=1")
        assert out.splitlines()[2] == "0.333333333333,0.666666666667"

    def test_output_file_and_determinism(self, run, tmp_path):
        argv = ["sweep", "delta_local", "--var", "epsilon", "--start", 0, "--stop", 1, "--steps", 11,
                "--set", "p=0.2", "--set", "n=5", "--series", "k=1,2", "--series", "D=2,4"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(*argv, "--out", a)[0] == 0
        assert run("--out", b, *argv)[0] == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().splitlines()[0] == "x,k=1;D=2,k=2;D=4"


SWEEPS = [
    ("eta_closed", "gamma", 1, 3, 21, {"p": 0.3, "D": 3}, ("D", [2, 3]),
     lambda q: eta_depolarizing_closed(q["p"], q["D"], q["gamma"])),
    ("delta_global", "epsilon", 0, 2, 25, {"p": 0.2, "n": 4, "kappa": 0.3}, ("D", [2, 4, 8]),
     lambda q: delta_global_depolarizing([q["p"]] * q["n"], q["D"], q["kappa"], q["epsilon"])),
    ("eps_global", "delta", 0, 0.05, 25, {"p": 0.2, "n": 3}, ("kappa", [0.1, 0.5]),
     lambda q: eps_global_depolarizing([q["p"]] * q["n"], q.get("D", 2), q["kappa"], q["delta"])),
    ("delta_local", "n", 1, 30, 30, {"p": 0.3, "epsilon": 0.1}, ("k", [1, 2, 3]),
     lambda q: delta_local_depolarizing(q["p"], 2, q["k"], q["n"], 0.1, q["epsilon"])),
    ("delta_qubit", "lambda", 0, 4, 41, {"n": 6, "epsilon": 0.2}, ("k", [1, 2]),
     lambda q: delta_qubit_noise(q["lambda"], q["k"], q["n"], 0.1, q["epsilon"])),
    ("trace_lower", "n", 1, 30, 30, {"p": 0.2, "distance": 1.0}, ("k", [1, 2]),
     lambda q: trace_lower_bound_local(q["p"], q["k"], q["n"], q["distance"]).value),
]


@pytest.mark.parametrize("case", SWEEPS, ids=lambda c: c[0])
def test_cells_rederivable(run, case):
    q, var, start, stop, steps, fixed, (skey, svals), oracle = case
    argv = ["sweep", q, "--var", var, "--start", start, "--stop", stop, "--steps", steps,
            "--series", f"{skey}={','.join(map(str, svals))}"]
    for k, v in fixed.items():
        argv += ["--set", f"{k}={v}"]
    code, out, err = run(*argv)
    assert code == 0, err
    _, rows = _table(out)
    assert [r[0] for r in rows] == sorted(r[0] for r in rows)
    grid = np.linspace(start, stop, steps)
    assert [r[0] for r in rows] == pytest.approx(list(grid), rel=1e-11)
    rng = np.random.default_rng(0)
    for i in rng.choice(len(rows), size=min(10, len(rows)), replace=False):
        for j, sv in enumerate(svals):
            # exact grid value: the printed x is rounded and epsilon is sensitive to delta
            params = {**fixed, skey: sv, var: float(grid[i])}
            if var in ("n", "k"):
                params[var] = int(params[var])
            expect = oracle(params)
            assert rows[i][j + 1] == pytest.approx(expect, rel=1e-11, abs=1e-300), (i, sv)


def test_region_lines_and_relaxation(run):
    _, out, _ = run("sweep", "region_lower,region_upper,relaxed_epsilon", "--var", "delta", "--start", 0,
                    "--stop", 0.05, "--steps", 6, "--set", "alpha=0.3", "--set", "epsilon=0.2",
                    "--set", "delta_tilde=0.1")
    header, rows = _table(out)
    assert header == ["x", "region_lower", "region_upper", "relaxed_epsilon"]
    for x, lo, hi, rel in rows:
        assert lo <= hi
        assert rel == pytest.approx(relax_budget(0.2, x, 0.1), rel=1e-11)


class TestRegion:
    def _channel(self, files, p):
        return files(f"d{p}.json", channel_to_json(depolarizing(p)))

    def test_all_inside(self, files, run, tmp_path):
        out_path = tmp_path / "r.csv"
        code, out, _ = run("region", self._channel(files, 0.72), "--samples", 1000,
                           "--epsilon", 0.2, "--delta", 0.01, "--out", out_path)
        assert code == 0 and out.startswith("no_violation_found")
        rows = list(csv.DictReader(out_path.open()))
        assert len(rows) == 1000 + 4
        assert all(r["inside"] == "1" for r in rows)

    def test_some_outside(self, files, run):
        code, out, err = run("region", self._channel(files, 0.3), "--samples", 1000, "--epsilon", 0.2, "--delta", 0.01)
        assert code == 0 and err.startswith("certified_violation")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert any(r["inside"] == "0" for r in rows)

    def test_one_sample(self, files, run):
        _, out, _ = run("region", self._channel(files, 0.5), "--samples", 1, "--epsilon", 0.2, "--delta", 0.01)
        assert len(out.splitlines()) == 1 + 5

    def test_explicit_states(self, files, run):
        rho = files("r.json", state_to_json(basis_state(2, 0)))
        sigma = files("s.json", state_to_json(basis_state(2, 1)))
        _, out, err = run("region", self._channel(files, 0.0), rho, sigma, "--samples", 5,
                          "--epsilon", 0.2, "--delta", 0.01)
        assert "certified_violation" in err and "exact delta 1" in err

    def test_deterministic(self, files, run, tmp_path):
        ch = self._channel(files, 0.5)
        a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
        run("region", ch, "--samples", 50, "--epsilon", 0.2, "--delta", 0.01, "--seed", 7, "--out", a)
        run("--seed", 7, "region", ch, "--samples", 50, "--epsilon", 0.2, "--delta", 0.01, "--out", b)
        run("region", ch, "--samples", 50, "--epsilon", 0.2, "--delta", 0.01, "--seed", 8, "--out", c)
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes() != c.read_bytes()

    def test_errors(self, files, run):
        ch = self._channel(files, 0.5)
        rho = files("r.json", state_to_json(maximally_mixed(3)))
        assert run("region", ch, rho, rho, "--epsilon", 0.2, "--delta", 0.01)[0] == 2
        assert run("region", ch, rho, "--epsilon", 0.2, "--delta", 0.01)[0] == 2
        assert run("region", ch, "--samples", 0, "--epsilon", 0.2, "--delta", 0.01)[0] == 2


class TestRenyi:
    def test_convert(self, run):
        _, out, _ = run("renyi", "convert", "--alpha", 2, "--epsilon", 0.5, "--delta", 1e-5)
        eps = float(out.split()[0].split("=")[1])
        assert eps == pytest.approx(renyi_to_approx_dp(RenyiBudget(0.5, 2.0), 1e-5).epsilon, abs=1e-12)

    def test_certify(self, files, run):
        ch = files("d.json", channel_to_json(depolarizing(0.5)))
        rho = files("r.json", state_to_json(np.diag([0.9, 0.1])))
        sigma = files("s.json", state_to_json(np.diag([0.1, 0.9])))
        code, out, _ = run("renyi", "certify", "--alpha", 2, "--channel", ch, "--rho", rho, "--sigma", sigma)
        assert code == 0 and float(out.split()[0].split("=")[1]) > 0

    def test_bad_alpha(self, run):
        assert run("renyi", "convert", "--alpha", 0.9, "--epsilon", 0.5, "--delta", 1e-5)[0] == 2
        assert run("renyi", "convert", "--alpha", 2)[0] == 2


@pytest.mark.skipif(shutil.which("hockeystick") is None, reason="console script not installed")
def test_console_script(tmp_path):
    path = tmp_path / "z.json"
    path.write_text(json.dumps(state_to_json(basis_state(2, 0))))
    res = subprocess.run(["hockeystick", "divergence", str(path), str(path), "--gamma", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout == "0.000000000000\n"
