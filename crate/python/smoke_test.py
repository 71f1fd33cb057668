#!/usr/bin/env python3
"""Smoke test for the freqshape_py extension module.

Builds are produced by `cargo build -p freqshape-python [--release]`; this
script locates the compiled library, loads it as `freqshape_py`, and walks
the main types and operations end to end.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path


def load_module():
    repo = Path(__file__).resolve().parent.parent
    candidates = [
        repo / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libfreqshape_py.so", "libfreqshape_py.dylib", "freqshape_py.dll")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit(
            "freqshape_py library not found; run `cargo build -p freqshape-python` first"
        )
    stage = Path(tempfile.mkdtemp(prefix="freqshape-py-"))
    suffix = ".pyd" if built.suffix == ".dll" else ".so"
    shutil.copy2(built, stage / f"freqshape_py{suffix}")
    sys.path.insert(0, str(stage))
    import freqshape_py

    return freqshape_py


def approx(a, b, rel=1e-9, abs_tol=0.0):
    return abs(a - b) <= max(rel * max(abs(a), abs(b)), abs_tol)


def main():
    fs = load_module()

    # Gain synthesis: tau=1, alpha_g=1, rho=0.5, b_hat=1 -> (kd, kp, ki) = (0, 3, 2).
    p_unit = fs.SystemParams(h=4.0, alpha_l=1.0, alpha_g=1.0, tau=1.0, b=1.0)
    gains = fs.synthesize(p_unit, 0.5)
    assert approx(gains.kd, 0.0, abs_tol=1e-14), gains
    assert approx(gains.kp, 3.0), gains
    assert approx(gains.ki, 2.0), gains

    # Demo parameters: matched design is certified by the overestimate
    # condition, and the certificate carries the admissible-set flags.
    demo = fs.SystemParams.demo()
    cert = fs.certify(demo, 0.5)
    assert cert.verdict == "StableByConditionI", cert.verdict
    assert cert.stable and cert.in_u and cert.branch_positive_real
    assert "verdict = StableByConditionI" in cert.report()
    assert all(pole.real < 0 for pole in cert.poles)

    # Target response: DC gain is -1/(alpha_l + alpha_g) for every rho.
    for rho in (0.0, 0.3, 0.8):
        tf = fs.target_transfer(demo, rho)
        assert approx(tf.dc_gain(), -1.0 / 21.0), (rho, tf.dc_gain())
        assert tf.is_stable()

    # First-order limit: nadir equals the steady-state magnitude at rho=0.
    m0 = fs.matched_step_metrics(demo, 0.0)
    assert approx(m0.nadir_pu, abs(m0.steady_state_freq_pu)), m0

    # No-IBR endpoint: zero inverter power.
    m_no_ibr = fs.matched_step_metrics(demo, demo.tau)
    assert m_no_ibr.peak_power_pu == 0.0

    # Trade-off sweep is sorted and monotone in both metrics.
    front = fs.pareto_sweep(demo, [0.2, 0.4, 0.6, 0.8])
    assert [r for r, _, _ in front] == [0.2, 0.4, 0.6, 0.8]
    nadirs = [n for _, n, _ in front]
    peaks = [pk for _, _, pk in front]
    assert nadirs == sorted(nadirs)
    assert peaks == sorted(peaks, reverse=True)

    # Sensitivity norm: closed form equals the H-infinity norm of S(s).
    closed = fs.sensitivity_norm_closed_form(demo, 0.5)
    numeric = fs.sensitivity_tf(demo, 0.5).hinf_norm()
    assert approx(closed, numeric, rel=1e-6), (closed, numeric)
    assert approx(closed, demo.alpha_g * (demo.tau - 0.5) / (demo.tau**2 * 0.5))

    # Mismatch sweep: matched column is stable, a severe underestimate at
    # small rho is reported unstable (as data, not an exception).
    cells = fs.mismatch_sweep(demo.with_b(0.05), 0.05, [0.3, 1.0], [0.05], threads=2)
    by_c = {c: (nadir, stable) for c, _, nadir, stable in cells}
    assert by_c[1.0][1] is True and by_c[1.0][0] is not None
    assert by_c[0.3][1] is False and by_c[0.3][0] is None

    # Mismatched closed loop degrades the nadir relative to the matched one.
    matched = fs.matched_step_metrics(demo, 0.5)
    mismatched = fs.simulate_closed_loop(demo.with_b_hat(5.0), 0.5)
    assert mismatched.nadir_mhz > matched.nadir_mhz
    assert math.isclose(
        fs.simulate_closed_loop(demo, 0.5).nadir_mhz, matched.nadir_mhz, rel_tol=1e-6
    )

    # Bundled reference tables are exposed.
    table = fs.quote_table("pareto")
    assert table.splitlines()[0] == "rho,nadir_mhz,peak_pu"
    assert len(fs.default_rho_grid(demo.tau)) == 20

    # Error mapping: validation failures raise ValueError, computation
    # failures raise RuntimeError.
    try:
        fs.SystemParams(h=-1.0, alpha_l=1.0, alpha_g=20.0, tau=1.0, b=1.0)
        raise AssertionError("negative inertia must be rejected")
    except ValueError:
        pass
    try:
        fs.synthesize(demo, demo.tau)  # rho = tau is outside the design set
        raise AssertionError("rho >= tau must be rejected")
    except ValueError:
        pass
    try:
        fs.simulate_closed_loop(demo.with_b(0.05).with_b_hat(0.015), 0.05)
        raise AssertionError("unstable design must not simulate")
    except RuntimeError:
        pass

    print("smoke test passed")


if __name__ == "__main__":
    main()
