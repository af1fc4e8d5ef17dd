import csv
import json

import numpy as np
import pytest

from sympulse import cli
from sympulse.errors import ProblemNotFound
from sympulse.problems import get_problem, registry
from sympulse.symmetry import hamiltonian_invariance_check


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


class TestRegistry:
    def test_contents(self):
        names = {p.name for p in registry()}
        assert {"oscillator", "kepler2d", "pendulum", "double_well"} <= names

    def test_kepler_symmetry(self):
        prob = get_problem("kepler2d")
        action, m = prob.symmetry
        assert np.array_equal(m.m, [[0.0, -1.0], [1.0, 0.0]])
        assert hamiltonian_invariance_check(prob.hamiltonian, m, rng=1, tol=1e-8,
                                            sampler=prob.sample_state).passed

    def test_oscillator_analytic(self):
        prob = get_problem("oscillator")
        assert prob.has_analytic_solution
        z = prob.exact(prob.initial, np.pi / 2)
        assert np.allclose(z.as_array(), [0.0, -1.0], atol=1e-15)

    def test_unknown(self):
        with pytest.raises(ProblemNotFound) as info:
            get_problem("nope")
        assert "kepler2d" in str(info.value)

    @pytest.mark.parametrize("name", ["oscillator", "kepler2d", "pendulum", "double_well"])
    def test_analytic_derivatives(self, name):
        from sympulse.cotangent_lift import HamiltonianSystem
        prob = get_problem(name)
        H = prob.hamiltonian
        H_fd = HamiltonianSystem(prob.n, H._energy)
        rng = np.random.default_rng(0)
        for _ in range(10):
            z = prob.sample_state(rng)
            for a, b in zip(H.grad(z), H_fd.grad(z)):
                assert np.allclose(a, b, atol=1e-6)
            H_h = HamiltonianSystem(prob.n, H._energy, H._grad)
            assert np.allclose(H.hessian(z), H_h.hessian(z), atol=1e-6)


class TestRun:
    def test_oscillator_midpoint(self, tmp_path):
        out = tmp_path / "run.csv"
        code = cli.main(["run", "--problem", "oscillator", "--theta", "0.5", "--h", "0.1",
                         "--steps", "100", "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert rows[0] == ["t", "q0", "p0", "energy_err", "newton_iters"]
        assert len(rows) == 102
        assert max(abs(float(r[3])) for r in rows[1:]) < 1e-10

    def test_zero_steps(self, tmp_path):
        out = tmp_path / "run.csv"
        assert cli.main(["run", "--steps", "0", "--out", str(out)]) == 0
        assert len(read_csv(out)) == 2

    def test_kepler_header_has_momentum(self, tmp_path):
        out = tmp_path / "k.csv"
        assert cli.main(["run", "--problem", "kepler2d", "--h", "0.01", "--steps", "50",
                         "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows[0] == ["t", "q0", "q1", "p0", "p1", "energy_err", "momentum_err", "newton_iters"]
        assert max(abs(float(r[6])) for r in rows[1:]) < 1e-12

    def test_kepler_forced_failure(self, tmp_path, capsys):
        out = tmp_path / "k.csv"
        code = cli.main(["run", "--problem", "kepler2d", "--h", "10", "--steps", "5", "--out", str(out)])
        assert code == 1
        rows = read_csv(out)
        assert 2 <= len(rows) < 7
        assert "error:" in capsys.readouterr().err

    def test_stdout(self, capsys):
        assert cli.main(["run", "--steps", "2"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 4

    def test_seventeen_digits(self, tmp_path):
        out = tmp_path / "r.csv"
        cli.main(["run", "--steps", "1", "--out", str(out)])
        q1 = float(read_csv(out)[2][1])
        from sympulse import midpoint_map, step, PhasePoint
        ref = step(midpoint_map(1), get_problem("oscillator").hamiltonian, 0.1, PhasePoint([1.0], [0.0]))
        assert q1 == ref.q[0]

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["run", "--problem", "kepler2d", "--map", "square", "--h", "0.02", "--steps", "30", "--seed", "7"]
        cli.main(args + ["--out", str(a)])
        cli.main(args + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"problem": "pendulum", "h": 0.05, "steps": 7}))
        out = tmp_path / "o.csv"
        assert cli.main(["run", "--config", str(cfg), "--steps", "3", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert len(rows) == 5
        assert float(rows[-1][0]) == pytest.approx(0.15)

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"problem": "oscillator", "bogus": 1}))
        assert cli.main(["run", "--config", str(cfg)]) == 2
        assert cli.main(["run", "--problem", "nope"]) == 2
        assert cli.main(["run", "--theta", "3"]) == 2
        assert cli.main(["run", "--compose", "what:1"]) == 2

    def test_argparse_error_exit_code(self):
        with pytest.raises(SystemExit) as info:
            cli.main(["run", "--h", "abc"])
        assert info.value.code == 2

    def test_momentum_requires_symmetry(self, tmp_path):
        assert cli.main(["momentum", "--problem", "pendulum"]) == 2
        out = tmp_path / "m.csv"
        assert cli.main(["momentum", "--problem", "kepler2d", "--steps", "5", "--h", "0.01",
                         "--out", str(out)]) == 0
        assert "momentum_err" in read_csv(out)[0]

    def test_env_newton_tol(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SYMPULSE_NEWTON_TOL", "1e-3")
        cfg = cli.load_config(cli.build_parser().parse_args(["run"]))
        assert cfg.newton().tol == 1e-3
        monkeypatch.setenv("SYMPULSE_NEWTON_TOL", "junk")
        assert cli.main(["run", "--steps", "1"]) == 2

    def test_compose_and_adjoint(self, tmp_path):
        out = tmp_path / "c.csv"
        assert cli.main(["run", "--compose", "gammas:0.5,0.5", "--adjoint", "--map", "euler",
                         "--steps", "3", "--out", str(out)]) == 0
        assert len(read_csv(out)) == 5
        assert cli.parse_composition("triple-jump:2").declared_order == 4
        assert cli.parse_composition("gammas:0.1,0.2,0.7").gammas[-1] == pytest.approx(0.7)


class TestCheck:
    def test_midpoint_kepler_passes(self, capsys):
        assert cli.main(["check", "--problem", "kepler2d"]) == 0
        text = capsys.readouterr().out
        for name in ("axioms", "symmetry", "pairing", "symplectic"):
            assert f"PASS  {name}" in text

    def test_rigged_fails(self, capsys):
        assert cli.main(["check", "--problem", "oscillator", "--map", "rigged"]) == 1
        assert "FAIL  axioms" in capsys.readouterr().out

    def test_square_symmetry_fails(self, capsys):
        assert cli.main(["check", "--problem", "kepler2d", "--map", "square"]) == 1
        text = capsys.readouterr().out
        assert "FAIL  symmetry" in text and "PASS  axioms" in text


class TestOrder:
    def test_midpoint(self, tmp_path, capsys):
        out = tmp_path / "o.csv"
        assert cli.main(["order", "--problem", "oscillator", "--h-list", "0.2,0.1,0.05,0.025",
                         "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "h,error" and len(lines) == 6
        slope = float(lines[-1].split()[1].split("=")[1])
        assert 1.9 <= slope <= 2.1

    def test_triple_jump(self, capsys):
        assert cli.main(["order", "--compose", "triple-jump:2"]) == 0
        last = capsys.readouterr().out.strip().splitlines()[-1]
        slope = float(last.split()[1].split("=")[1])
        assert 3.7 <= slope <= 4.3

    def test_too_few(self):
        assert cli.main(["order", "--h-list", "0.1,0.05"]) == 2

    def test_not_dividing(self):
        assert cli.main(["order", "--h-list", "0.3,0.2,0.1"]) == 2
