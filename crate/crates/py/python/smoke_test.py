"""Smoke test for the ipm extension module."""

import math
import os
import tempfile

import ipm


def main():
    d = ipm.Domain.torus(32, 32)
    x1, x2 = d.x1_grid(), d.x2_grid()
    vals = [math.sin(y) for y in x2 for _ in x1]
    f = ipm.Field(d, vals)
    assert len(f) == 32 * 32

    # stratified states do not move
    u1, u2 = ipm.velocity(f)
    assert u1.max_abs() < 1e-12 and u2.max_abs() < 1e-12

    g = ipm.initial_field("domain.nx = 32\nscenario = s2_symmetric\n")
    assert g.odd_x2_defect() < 1e-10
    rec = ipm.diagnostics(g, 0.0, [1.0, 2.0])
    assert rec["delta"] > 0 and "hs_drho_2" in rec

    records, last, stop = ipm.simulate(g, 0.2, sample_interval=0.1)
    assert stop == "completed", stop
    energies = [r["E"] for r in records]
    assert all(b <= a for a, b in zip(energies, energies[1:])), energies

    with tempfile.TemporaryDirectory() as tmp:
        snap = os.path.join(tmp, "x.ipms")
        ipm.write_snapshot(snap, last, records[-1]["t"])
        back, t = ipm.read_snapshot(snap, kind="torus")
        assert back.values == last.values and t == records[-1]["t"]
        try:
            ipm.read_snapshot(snap, kind="strip")
        except ValueError:
            pass
        else:
            raise AssertionError("domain tag not checked")

        out = os.path.join(tmp, "run")
        cfg = "domain.nx = 32\nscenario = s2_symmetric\nstepper.t_end = 0.2\nsample.interval = 0.05\n"
        summary = ipm.run(cfg, out)
        assert summary["exit_code"] == 0, summary
        assert all(r["status"] == "PASS" for r in summary["reports"]), summary["reports"]
        reports = ipm.certify([out], ["energy", "thm2"])
        assert [r["status"] for r in reports] == ["PASS", "PASS"], reports

    p = ipm.rearrange(f)
    assert max(abs(a - math.sin(y)) for a, y in zip(p, x2)) < 0.05

    try:
        ipm.initial_field("domain.nx = 32\nscenario.bubble.radios = 1\n")
    except ValueError as e:
        assert "radios" in str(e)
    else:
        raise AssertionError("bad key accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
