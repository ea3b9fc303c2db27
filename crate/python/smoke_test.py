"""Imports the compiled extension and exercises each binding once.

Build first with
    cargo build --release -p streamista-python --features extension-module
The module is loaded from target/release (or target/debug), or from the path
in STREAMISTA_SO.
"""

import importlib.machinery
import importlib.util
import math
import os
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def locate():
    if "STREAMISTA_SO" in os.environ:
        return pathlib.Path(os.environ["STREAMISTA_SO"])
    for profile in ("release", "debug"):
        for name in ("libstreamista_py.so", "libstreamista_py.dylib", "streamista_py.dll"):
            path = ROOT / "target" / profile / name
            if path.exists():
                return path
    sys.exit("extension not built; see the module docstring")


def load(path):
    loader = importlib.machinery.ExtensionFileLoader("streamista", str(path))
    spec = importlib.util.spec_from_file_location("streamista", path, loader=loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def main():
    st = load(locate())

    phi = st.gen_gaussian_matrix(16, 32, 7)
    assert phi.shape == (16, 32)
    cols = list(zip(*phi.to_rows()))
    assert all(abs(math.fsum(x * x for x in c) - 1.0) < 1e-12 for c in cols)
    delta, support = phi.rip_exact(2)
    assert 0.0 < delta < 1.0 and len(support) == 2

    target = st.assemble_target(n=32, s=4, n_pairs=1, length=20, beta=1.0, mu=0.5, seed=3)
    assert len(target) == 20 and all(len(s) == 4 for s in target.support)
    ys = [phi.measure(x) for x in target.samples]

    trace = st.run_streaming(phi, ys, target, 0.05, eta=0.5, p=4)
    assert len(trace.errors) == 80 and len(trace.pre_measurement_errors) == 20
    assert trace.pre_measurement_errors[-1] < trace.initial_error

    held = target.zero_hold(2)
    ys_held = [phi.measure(x) for x in held.samples]
    lca = st.lca_simulate(phi, ys_held, held, 0.05, 0.5)
    ista = st.run_streaming(phi, ys_held, held, 0.05, eta=1.0, p=1, dl=0.5)
    assert lca.errors == ista.errors

    assert st.soft_threshold([0.5, -2.0, 1.0], 1.0) == [0.0, -1.0, 0.0]

    bound = st.IstaBound(0.5, 1.0, 0.0, 0.2, 1, 1.0, 1.0, 2, 0.0, 2.0)
    assert abs(bound.bound(3) - 51.0 / 60.0) < 1e-12
    lca_bound = st.LcaBound(0.2, 1.0, 0.5, 0.1, 0.2, 2, 1.0, 3.0)
    assert abs(lca_bound.bound(1e4) - lca_bound.d) < 1e-12

    ps = list(range(1, 11))
    clean = [0.5**p / (1 - 0.5**p) * 0.8 + 0.4 for p in ps]
    c_hat, v_hat, _, r2 = st.fit_steady_state(ps, clean, 0.8, 1.0)
    assert abs(c_hat - 0.5) < 1e-3 and abs(v_hat - 0.4) < 1e-3 and r2 > 0.9999

    mean, std = st.run_trials("eta = 0.33\nlambda = 0.08\ntrials = 4\nmeasurements = 6\n")
    assert len(mean) == len(std) == 6

    try:
        st.gen_gaussian_matrix(0, 4, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("empty matrix accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
