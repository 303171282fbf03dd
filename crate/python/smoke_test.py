"""Smoke test for the Python bindings.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/mscale_fno_py-*.whl
"""

import math
import tempfile

import mscale_fno_py as m


def close(a, b, tol):
    return all(abs(x - y) <= tol for x, y in zip(a, b)) and len(a) == len(b)


def main():
    # Published architecture sizes.
    assert m.FnoConfig(48, 500, 1).parameter_count() == 1_164_001
    assert m.FnoConfig(48, 500, 4).parameter_count() == 4_641_169
    assert m.mscale_count(m.FnoConfig(16, 500, 1, "sine"), 8) == 1_035_544
    assert m.mscale_count(m.FnoConfig(16, 500, 4, "sine"), 8) == 4_127_128

    cfg = m.FnoConfig(6, 8, 2, "sine")
    n = 33
    grid = [-1.0 + 2.0 * j / (n - 1) for j in range(n)]
    inputs = [[math.sin(math.pi * k * x) for x in grid] for k in (1, 2, 3)]

    model = m.Model.mscale(cfg, [1.0, 3.0, 9.0], seed=4)
    out = model.forward(grid, inputs)
    parts = model.branch_contributions(grid, inputs)
    assert len(out) == 3 and len(out[0]) == n and len(parts) == 3
    for s in range(3):
        summed = [sum(p[s][j] for p in parts) for j in range(n)]
        assert close(summed, out[s], 1e-12)

    with tempfile.TemporaryDirectory() as tmp:
        path = model.save(f"{tmp}/ck")
        again = m.Model.load(path)
        assert again.forward(grid, inputs) == out

    ds = m.Dataset.generate("desk", seed=1, counts=(8, 2, 2))
    assert len(ds) == 12 and len(ds.grid) == 257
    small = m.Model.fno(m.FnoConfig(4, 16, 1), seed=0)
    history = small.train(ds, epochs=2, batch_size=4)
    assert len(history) == 2 and all(math.isfinite(r[1]) for r in history)
    assert len(small.evaluate(ds, "test")) == 2

    assert m.relative_l2([1.0, 1.0], [1.0, 0.0]) == 1.0

    # u'' = 2 on [0, 1] with zero ends gives u = x(x - 1).
    k = 11
    h = 1.0 / (k - 1)
    u = m.solve_dirichlet(h, [0.0] * k, [2.0] * k)
    xs = [j * h for j in range(k)]
    assert close(u, [x * (x - 1.0) for x in xs], 1e-12)

    a = m.gen_input_function(grid, 20, 7)
    assert abs(max(abs(v) for v in a) - 1.0) < 1e-15
    assert "desk" in m.PRESETS

    try:
        m.Dataset.generate("nope")
    except ValueError as e:
        assert "ex4.1" in str(e)
    else:
        raise AssertionError("unknown preset accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
