"""Compare the numba and pure-numpy exploration kernels.

    python3 benchmarks/bench_explore.py [--repeat 3]

Each case unfolds the net once, warms the numba kernel up (compilation is
not timed) and then times both kernels on the same masks.
"""
import argparse
import time

from tree2ring.explorer import kernels, unfold
from tree2ring.topology import Tree, enumerate_topologies, ten_node


def cases():
    trees7 = list(enumerate_topologies(7))
    yield "ten_node simplified", ten_node(), "simplified"
    yield "ten_node original", ten_node(), "original"
    yield "ten_node pred", ten_node(), "pred"
    yield "n=7 path", trees7[0], "simplified"
    yield "n=7 star", trees7[-1], "simplified"
    yield "n=12 binary-ish", Tree.from_parents([0, 0, 1, 1, 2, 2, 3, 3, 4, 5, 6]), "succ"


def best_of(fn, repeat):
    best, res = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = fn()
        best = min(best, time.perf_counter() - t0)
    return best, res


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed")

    warm = unfold(Tree.from_parents([0]), "simplified")
    kernels.bfs_numba(warm.encode(warm.initial), *warm.masks())

    print(f"{'case':<20}{'words':>6}{'states':>12}{'arcs':>12}{'numba s':>10}{'numpy s':>10}{'speedup':>9}")
    for name, tree, variant in cases():
        net = unfold(tree, variant)
        init = net.encode(net.initial)
        pre, post = net.masks()
        tn, a = best_of(lambda: kernels.bfs_numba(init, pre, post), args.repeat)
        tp, b = best_of(lambda: kernels.bfs_numpy(init, pre, post), args.repeat)
        assert (len(a.states), a.arcs) == (len(b.states), b.arcs)
        print(f"{name:<20}{net.words:>6}{len(a.states):>12,}{a.arcs:>12,}{tn:>10.3f}{tp:>10.3f}{tp / tn:>9.2f}")


if __name__ == "__main__":
    main()
