"""Time the compiled and pure-Python statevector backends side by side.

    python3 benchmarks/bench_backends.py [--repeat 5] [--qubits 4 10]
"""

import argparse
import time

import numpy as np

from qkmeans import _kernels
from qkmeans.feature_maps import FeatureMapConfig, build_circuit, theta_for
from qkmeans.kernel import ShotMode, kernel_matrix
from qkmeans.statevector import evolve


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n_qubits, rows, rng):
    zz = FeatureMapConfig("zz", n_qubits, entanglement="full")
    su2 = FeatureMapConfig("efficient_su2", n_qubits)
    data = rng.uniform(0, np.pi, size=(rows, n_qubits))
    circuit = build_circuit(data[0], zz)
    skeleton = circuit.skeleton()
    angles = np.array([build_circuit(r, zz).angles() for r in data])

    def simulate():
        states = np.zeros((rows, 1 << n_qubits), dtype=complex)
        states[:, 0] = 1
        evolve(states, skeleton, angles)

    return [
        (f"evolve zz-full batch {rows}", simulate),
        (f"kernel zz-full exact {rows}x{rows}", lambda: kernel_matrix(data, zz)),
        (f"kernel su2 exact {rows}x{rows}",
         lambda: kernel_matrix(data, su2, theta_for(su2, n_qubits))),
        (f"kernel zz-full shots {min(rows, 60)}^2",
         lambda: kernel_matrix(data[:60], zz, mode=ShotMode(1024, 0))),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--qubits", type=int, nargs="+", default=[4, 10])
    ap.add_argument("--rows", type=int, default=150)
    args = ap.parse_args()

    backends = sorted(_kernels.BACKENDS)
    if "compiled" not in backends:
        print("compiled extension not built; timing the python backend only")
    print(f"{'case':<34} {'qubits':>6} " + " ".join(f"{b:>10}" for b in backends) + "  speedup")
    for n in args.qubits:
        for name, fn in cases(n, args.rows, np.random.default_rng(0)):
            row = {}
            for b in backends:
                _kernels.set_backend(b)
                fn()  # warm up
                row[b] = best_of(fn, args.repeat)
            speed = row["python"] / row["compiled"] if "compiled" in row else float("nan")
            cells = " ".join(f"{row[b] * 1e3:>8.2f}ms" for b in backends)
            print(f"{name:<34} {n:>6} {cells}  {speed:6.2f}x")


if __name__ == "__main__":
    main()
