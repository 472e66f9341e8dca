import math

import numpy as np
import pytest

import critheat


def radial(n=256):
    return critheat.Domain("unit-ball", n, "radial")


def test_gamma_star_center():
    d = radial()
    sp = critheat.eigenpairs(d, 2)
    assert sp.lambda1 == pytest.approx(math.pi**2, rel=1e-3)
    assert critheat.gamma_star(d, sp) == pytest.approx(math.pi**2 / 4, rel=1e-6)
    assert critheat.admissible(d, sp)["admissible"]


def test_robin_closed_form():
    d = radial()
    sp = critheat.eigenpairs(d, 2)
    assert critheat.robin(d, sp, 2.0) == pytest.approx(critheat.ball_robin_center(2.0), rel=1e-3)


def test_evolve_decays():
    d = radial(128)
    sp = critheat.eigenpairs(d, 1)
    phi = np.abs(sp.fields[:, 0])
    tr = critheat.evolve(d, 0.01 * phi, horizon=2.0)
    assert tr["status"] == "decayed"
    assert tr["energy_violations"] == 0


def test_run_and_errors():
    cfg = {"command": "gammastar", "domain": {"kind": "unit-ball", "mode": "radial", "resolution": 256}}
    summary, files = critheat.run(cfg)
    assert summary["admissible"] is True
    assert summary["gamma_star"] == pytest.approx(2.4674, abs=1e-3)
    with pytest.raises(critheat.ConfigError):
        critheat.run({"command": "gammastar", "bogus": 1})
