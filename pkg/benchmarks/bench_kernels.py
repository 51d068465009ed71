"""Time the compiled and pure-Python kernels on the nominal problem sizes.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from driveby import _pykernels
from driveby import bridge as bfem
from driveby import estimator as est
from driveby.vehicle import VehicleParams

try:
    from driveby import _ckernels
except ImportError:
    _ckernels = None


def cases():
    beam = bfem.assemble(bfem.BridgeParams.uniform())
    n = beam.n_free
    rng = np.random.default_rng(0)
    loads = rng.standard_normal((6001, n)) * 1e4
    newmark = (beam.M, beam.C, beam.K, loads, 0.001, 0.5, 0.25, np.zeros(n), np.zeros(n))

    cfg = est.FilterConfig.for_noise(0.15)
    model = est.build_state_space(VehicleParams(), cfg.q_diag, cfg.r_diag, cfg.dt)
    obs = np.ascontiguousarray(rng.standard_normal((6001, 4)))
    kalman = (model.V_bar, model.H, model.Q, model.R, obs, np.zeros(12), np.diag(cfg.p0_diag))
    return {"newmark_linear": newmark, "kalman_filter": kalman}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    else:
        print("compiled kernels not built; timing the Python backend only")

    print(f"{'kernel':16s} {'backend':8s} {'best [ms]':>10s} {'speedup':>8s} {'max rel diff':>13s}")
    for name, args_ in cases().items():
        ref_time, ref_out = None, None
        for label, mod in backends.items():
            fn = getattr(mod, name)
            best = min(timeit.repeat(lambda: fn(*args_), number=1, repeat=args.repeat))
            out = fn(*args_)[0]
            if ref_out is None:
                ref_time, ref_out, diff = best, out, 0.0
            else:
                diff = float(np.max(np.abs(out - ref_out)) / np.max(np.abs(ref_out)))
            print(f"{name:16s} {label:8s} {best * 1e3:10.2f} {ref_time / best:8.1f} {diff:13.2e}")


if __name__ == "__main__":
    main()
