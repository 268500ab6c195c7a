"""Hot numeric kernels for the flattening solver.

Two interchangeable backends:

* ``numba`` (default): the whole descent loop is JIT-compiled.
* ``numpy``: vectorized fallback, no compilation.

Selection: environment variable ``LINKLOCK_NUMBA``. Any of ``0``, ``false``,
``off``, ``no`` selects the numpy path; everything else (or unset) uses numba
when importable. ``backend_name()`` reports the active choice.

Kernel contracts (shared by both backends):

``flatness(coords)``
    sum over vertices of y^2 + max(0, -x)^2, coords already root-anchored.

``any_crossing(coords, pairs)``
    True iff some listed segment pair crosses transversally (strict, with
    margin CROSS_TOL). ``pairs`` is an (k, 4) int array of vertex indices
    (a1, a2, b1, b2), normally the non-adjacent edge pairs.

``retract(cand, prev, order, parent, plen)``
    Restore exact edge lengths by walking the tree root-down, keeping each
    edge's direction from ``cand`` (falling back to ``prev`` when collapsed).

``descend(...)``
    The projected-gradient loop; see ``flatten`` for the schedule.
"""

from __future__ import annotations

import os

import numpy as np

CROSS_TOL = 1e-12

STATUS_RUNNING = 0
STATUS_FLAT = 1
STATUS_STALLED = 2

_env = os.environ.get("LINKLOCK_NUMBA", "").strip().lower()
_want_numba = _env not in ("0", "false", "off", "no")

try:  # pragma: no cover - exercised via backend_name tests
    if not _want_numba:
        raise ImportError("numba disabled via LINKLOCK_NUMBA")
    from numba import njit

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover
    _HAS_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def backend_name() -> str:
    return "numba" if _HAS_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Loop implementations (numba-compilable; also valid plain Python).
# ---------------------------------------------------------------------------

def _flatness_loop(coords):
    total = 0.0
    for i in range(coords.shape[0]):
        y = coords[i, 1]
        total += y * y
        x = coords[i, 0]
        if x < 0.0:
            total += x * x
    return total


def _grad_loop(coords, root, out):
    for i in range(coords.shape[0]):
        x = coords[i, 0]
        gx = 2.0 * x if x < 0.0 else 0.0
        out[i, 0] = gx
        out[i, 1] = 2.0 * coords[i, 1]
    out[root, 0] = 0.0
    out[root, 1] = 0.0


def _any_crossing_loop(coords, pairs):
    tol = CROSS_TOL
    for k in range(pairs.shape[0]):
        a1 = pairs[k, 0]
        a2 = pairs[k, 1]
        b1 = pairs[k, 2]
        b2 = pairs[k, 3]
        p1x = coords[a1, 0]; p1y = coords[a1, 1]
        p2x = coords[a2, 0]; p2y = coords[a2, 1]
        q1x = coords[b1, 0]; q1y = coords[b1, 1]
        q2x = coords[b2, 0]; q2y = coords[b2, 1]
        rx = q2x - q1x; ry = q2y - q1y
        d1 = rx * (p1y - q1y) - ry * (p1x - q1x)
        d2 = rx * (p2y - q1y) - ry * (p2x - q1x)
        if (d1 > tol and d2 > tol) or (d1 < -tol and d2 < -tol):
            continue
        sx = p2x - p1x; sy = p2y - p1y
        d3 = sx * (q1y - p1y) - sy * (q1x - p1x)
        d4 = sx * (q2y - p1y) - sy * (q2x - p1x)
        if (d3 > tol and d4 > tol) or (d3 < -tol and d4 < -tol):
            continue
        # Signs are opposite-or-zero on both; require strict transversality.
        if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and (
            (d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)
        ):
            return True
    return False


def _retract_loop(cand, prev, order, parent, plen):
    for k in range(1, order.shape[0]):
        v = order[k]
        p = parent[v]
        L = plen[v]
        if L <= 0.0:
            cand[v, 0] = cand[p, 0]
            cand[v, 1] = cand[p, 1]
            continue
        dx = cand[v, 0] - cand[p, 0]
        dy = cand[v, 1] - cand[p, 1]
        n = (dx * dx + dy * dy) ** 0.5
        if n < 1e-12:
            dx = prev[v, 0] - prev[p, 0]
            dy = prev[v, 1] - prev[p, 1]
            n = (dx * dx + dy * dy) ** 0.5
            if n < 1e-12:
                dx = 1.0
                dy = 0.0
                n = 1.0
        s = L / n
        cand[v, 0] = cand[p, 0] + dx * s
        cand[v, 1] = cand[p, 1] + dy * s


def _descend_loop(coords, order, parent, plen, pairs, budget, step0,
                  max_disp, flat_tol, record_every, samples):
    n = coords.shape[0]
    root = order[0]
    grad = np.zeros((n, 2))
    cand = np.zeros((n, 2))
    mid = np.zeros((n, 2))
    eta = step0
    f = _flatness_loop(coords)
    nrec = 0
    accepted = 0
    status = STATUS_RUNNING
    cap = samples.shape[0]
    for _ in range(budget):
        if f <= flat_tol:
            status = STATUS_FLAT
            break
        _grad_loop(coords, root, grad)
        gmax = 0.0
        for i in range(n):
            a = abs(grad[i, 0])
            b = abs(grad[i, 1])
            if a > gmax:
                gmax = a
            if b > gmax:
                gmax = b
        if gmax < 1e-15:
            status = STATUS_STALLED
            break
        for i in range(n):
            cand[i, 0] = coords[i, 0] - eta * grad[i, 0]
            cand[i, 1] = coords[i, 1] - eta * grad[i, 1]
        _retract_loop(cand, coords, order, parent, plen)
        disp = 0.0
        for i in range(n):
            dx = cand[i, 0] - coords[i, 0]
            dy = cand[i, 1] - coords[i, 1]
            d = (dx * dx + dy * dy) ** 0.5
            if d > disp:
                disp = d
        ok = disp <= max_disp
        if ok:
            for i in range(n):
                mid[i, 0] = 0.5 * (cand[i, 0] + coords[i, 0])
                mid[i, 1] = 0.5 * (cand[i, 1] + coords[i, 1])
            if _any_crossing_loop(cand, pairs) or _any_crossing_loop(mid, pairs):
                ok = False
        if ok:
            for i in range(n):
                coords[i, 0] = cand[i, 0]
                coords[i, 1] = cand[i, 1]
            f = _flatness_loop(coords)
            accepted += 1
            if eta < 0.25:
                eta = eta * 1.25
            if accepted % record_every == 0 and nrec < cap:
                for i in range(n):
                    samples[nrec, i, 0] = coords[i, 0]
                    samples[nrec, i, 1] = coords[i, 1]
                nrec += 1
        else:
            eta *= 0.5
            if eta < 1e-15:
                status = STATUS_STALLED
                break
    if status == STATUS_RUNNING and f <= flat_tol:
        status = STATUS_FLAT
    return f, status, nrec, accepted


# ---------------------------------------------------------------------------
# Pure-numpy vectorized variants (fallback backend + reference for benchmarks).
# ---------------------------------------------------------------------------

def flatness_numpy(coords: np.ndarray) -> float:
    y = coords[:, 1]
    x = coords[:, 0]
    return float(np.sum(y * y) + np.sum(np.minimum(x, 0.0) ** 2))


def any_crossing_numpy(coords: np.ndarray, pairs: np.ndarray) -> bool:
    if pairs.shape[0] == 0:
        return False
    p1 = coords[pairs[:, 0]]
    p2 = coords[pairs[:, 1]]
    q1 = coords[pairs[:, 2]]
    q2 = coords[pairs[:, 3]]
    r = q2 - q1
    d1 = r[:, 0] * (p1[:, 1] - q1[:, 1]) - r[:, 1] * (p1[:, 0] - q1[:, 0])
    d2 = r[:, 0] * (p2[:, 1] - q1[:, 1]) - r[:, 1] * (p2[:, 0] - q1[:, 0])
    s = p2 - p1
    d3 = s[:, 0] * (q1[:, 1] - p1[:, 1]) - s[:, 1] * (q1[:, 0] - p1[:, 0])
    d4 = s[:, 0] * (q2[:, 1] - p1[:, 1]) - s[:, 1] * (q2[:, 0] - p1[:, 0])
    t = CROSS_TOL
    opp12 = ((d1 > t) & (d2 < -t)) | ((d1 < -t) & (d2 > t))
    opp34 = ((d3 > t) & (d4 < -t)) | ((d3 < -t) & (d4 > t))
    return bool(np.any(opp12 & opp34))


def retract_numpy(cand, prev, order, parent, plen) -> None:
    _retract_loop(cand, prev, order, parent, plen)


def descend_numpy(coords, order, parent, plen, pairs, budget, step0,
                  max_disp, flat_tol, record_every, samples):
    """Vectorized step loop; same schedule as the compiled kernel."""
    n = coords.shape[0]
    root = order[0]
    eta = step0
    f = flatness_numpy(coords)
    nrec = 0
    accepted = 0
    status = STATUS_RUNNING
    cap = samples.shape[0]
    for _ in range(budget):
        if f <= flat_tol:
            status = STATUS_FLAT
            break
        grad = np.zeros_like(coords)
        grad[:, 0] = 2.0 * np.minimum(coords[:, 0], 0.0)
        grad[:, 1] = 2.0 * coords[:, 1]
        grad[root] = 0.0
        gmax = float(np.max(np.abs(grad)))
        if gmax < 1e-15:
            status = STATUS_STALLED
            break
        cand = coords - eta * grad
        retract_numpy(cand, coords, order, parent, plen)
        disp = float(np.max(np.hypot(*(cand - coords).T)))
        ok = disp <= max_disp
        if ok:
            mid = 0.5 * (cand + coords)
            ok = not (any_crossing_numpy(cand, pairs)
                      or any_crossing_numpy(mid, pairs))
        if ok:
            coords[:] = cand
            f = flatness_numpy(coords)
            accepted += 1
            eta = min(eta * 1.25, 0.25)
            if accepted % record_every == 0 and nrec < cap:
                samples[nrec] = coords
                nrec += 1
        else:
            eta *= 0.5
            if eta < 1e-15:
                status = STATUS_STALLED
                break
    if status == STATUS_RUNNING and f <= flat_tol:
        status = STATUS_FLAT
    return f, status, nrec, accepted


# ---------------------------------------------------------------------------
# Backend dispatch.
# ---------------------------------------------------------------------------

if _HAS_NUMBA:
    _flatness_jit = njit(cache=True)(_flatness_loop)
    _grad_jit = njit(cache=True)(_grad_loop)
    _any_crossing_jit = njit(cache=True)(_any_crossing_loop)
    _retract_jit = njit(cache=True)(_retract_loop)

    @njit(cache=True)
    def _descend_jit(coords, order, parent, plen, pairs, budget, step0,
                     max_disp, flat_tol, record_every, samples):
        n = coords.shape[0]
        root = order[0]
        grad = np.zeros((n, 2))
        cand = np.zeros((n, 2))
        mid = np.zeros((n, 2))
        eta = step0
        f = _flatness_jit(coords)
        nrec = 0
        accepted = 0
        status = STATUS_RUNNING
        cap = samples.shape[0]
        for _ in range(budget):
            if f <= flat_tol:
                status = STATUS_FLAT
                break
            _grad_jit(coords, root, grad)
            gmax = 0.0
            for i in range(n):
                a = abs(grad[i, 0])
                b = abs(grad[i, 1])
                if a > gmax:
                    gmax = a
                if b > gmax:
                    gmax = b
            if gmax < 1e-15:
                status = STATUS_STALLED
                break
            for i in range(n):
                cand[i, 0] = coords[i, 0] - eta * grad[i, 0]
                cand[i, 1] = coords[i, 1] - eta * grad[i, 1]
            _retract_jit(cand, coords, order, parent, plen)
            disp = 0.0
            for i in range(n):
                dx = cand[i, 0] - coords[i, 0]
                dy = cand[i, 1] - coords[i, 1]
                d = (dx * dx + dy * dy) ** 0.5
                if d > disp:
                    disp = d
            ok = disp <= max_disp
            if ok:
                for i in range(n):
                    mid[i, 0] = 0.5 * (cand[i, 0] + coords[i, 0])
                    mid[i, 1] = 0.5 * (cand[i, 1] + coords[i, 1])
                if _any_crossing_jit(cand, pairs) or _any_crossing_jit(mid, pairs):
                    ok = False
            if ok:
                for i in range(n):
                    coords[i, 0] = cand[i, 0]
                    coords[i, 1] = cand[i, 1]
                f = _flatness_jit(coords)
                accepted += 1
                if eta < 0.25:
                    eta = eta * 1.25
                if accepted % record_every == 0 and nrec < cap:
                    for i in range(n):
                        samples[nrec, i, 0] = coords[i, 0]
                        samples[nrec, i, 1] = coords[i, 1]
                    nrec += 1
            else:
                eta *= 0.5
                if eta < 1e-15:
                    status = STATUS_STALLED
                    break
        if status == STATUS_RUNNING and f <= flat_tol:
            status = STATUS_FLAT
        return f, status, nrec, accepted

    flatness = _flatness_jit
    any_crossing = _any_crossing_jit
    retract = _retract_jit
    descend = _descend_jit
else:
    flatness = flatness_numpy
    any_crossing = any_crossing_numpy
    retract = retract_numpy
    descend = descend_numpy
