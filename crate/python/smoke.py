"""Smoke test for the pygdopt extension module.

Build and install first, e.g. `pip install ./crates/python` or
`maturin develop -m crates/python/Cargo.toml`, then run `python python/smoke.py`.
"""

import math
import os
import tempfile

import pygdopt as g


def main():
    assert g.p_count(1) == 3 and g.p_count(5) == 21
    print("terms K=2:", g.model_terms(2))
    print("f(0.5, -1):", g.model_expand([0.5, -1.0]))

    d = g.Design([[-1.0], [0.0], [1.0]])
    G, argmax = g.g_score(d)
    eff = g.g_efficiency(G, g.p_count(1))
    print(f"{{-1, 0, 1}}: G = {G:.12f}, G_eff = {eff:.6f}, argmax = {argmax}")
    assert abs(G - 3.0) < 1e-12

    report = g.rescore_fine(d, 21)
    assert not report["suspect"]

    r = g.run_search(1, 3, seed=7)
    print(r)
    assert r.best_g_eff >= 99.999
    assert r.eval_count == 150 * (1 + r.iterations)

    cat = g.run_batch(2, 6, 4, base_seed=0, max_iterations=300)
    best = cat.best()
    print(f"K=2 N=6, 4 short runs: best G_eff {best.best_g_eff:.3f} (seed {best.seed})")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "best.csv")
        best.best_design.write_csv(path)
        back = g.Design.read_csv(path)
        assert back == best.best_design
        assert g.g_score(back)[0] == best.best_g

    est, (lo, hi) = g.scale_eval_count(cat.total_evals, len(cat), 200)
    print(f"evaluations scaled to 200 runs: {est:.0f} ({lo:.0f}..{hi:.0f})")

    G, argmax = g.g_score(g.Design([[0.0], [0.0], [0.0]]))
    assert math.isinf(G) and argmax is None
    print("smoke test passed")


if __name__ == "__main__":
    main()
