"""Smoke test for the Python bindings.

Build and run from the workspace root:

    cargo build -p alphageo-py --release --features extension-module
    cp target/release/libalphageo_py.so python/alphageo.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np

import alphageo


def rae(p, q, a):
    # direct formula, independent of the bindings
    p, q = np.asarray(p), np.asarray(q)
    return (
        a / (1 - a) * math.log(np.sum(p * q ** (a - 1)))
        - math.log(np.sum(p**a)) / (1 - a)
        + math.log(np.sum(q**a))
    )


def main():
    p, q = [0.2, 0.3, 0.5], [0.4, 0.4, 0.2]
    for a in (0.5, 2.0, 3.0):
        got = alphageo.relative_alpha_entropy(p, q, a)
        assert abs(got - rae(p, q, a)) < 1e-12, (a, got)
        assert abs(alphageo.relative_alpha_entropy(p, p, a)) < 1e-14
    kl = sum(x * math.log(x / y) for x, y in zip(p, q))
    assert abs(alphageo.kld(p, q) - kl) < 1e-14
    assert abs(alphageo.relative_alpha_entropy(p, q, 1.0) - kl) < 1e-14
    assert abs(sum(alphageo.escort(p, 2.0)) - 1) < 1e-15

    try:
        alphageo.kld([0.5, 0.6], q[:2])
    except ValueError:
        pass
    else:
        raise AssertionError("unnormalized pmf accepted")

    m = alphageo.Model('{"type": "bernoulli"}', '{"type": "uniform_box", "domain": [[0.1, 0.9]]}')
    assert m.k == 1
    assert m.pmf([0.3]) == [0.7, 0.3]
    assert abs(m.prior_density([0.3]) - 1 / 0.8) < 1e-14
    assert abs(m.divergence([0.3], [0.3], 2.0)) < 1e-14

    t, a = 0.3, 2.0
    an = m.bayesian_metric([t], a)[0][0]
    fd = m.eguchi_metric([t], a)[0][0]
    assert abs(fd / an - 1) < 1e-4, (fd, an)

    r = m.verify_bound(a)
    assert r["status"] == "HOLDS", r
    assert r["gap_min_eig"] >= -1e-8
    print("alphageo", alphageo.__version__, "smoke test ok:", r["status"], r["step_status"])


if __name__ == "__main__":
    main()
