"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable, or when
``BONNETFORGE_BACKEND=python`` is set.  Semantics must match ``_kernels.pyx``
exactly (same traversal order, same arithmetic grouping where it matters).
"""
from collections import deque

import numpy as np


def qmul(p, q):
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def sandwich(lam, p):
    lc = lam * np.array([1.0, -1.0, -1.0, -1.0])
    return qmul(qmul(lc, p), lam)


def integrate_paths(a_u, a_v, hu, hv, i0, j0):
    """Trapezoidal potentials along the two staircase paths from (i0, j0).

    Path A walks along u on row j0, then along v.  Path B walks along v on
    column i0, then along u.  Returns ``(FA, FB)``.
    """
    nu, nv = a_u.shape[:2]
    eu = 0.5 * hu * (a_u[1:] + a_u[:-1])
    ev = 0.5 * hv * (a_v[:, 1:] + a_v[:, :-1])
    cu = np.zeros_like(a_u)
    cv = np.zeros_like(a_v)
    np.cumsum(eu, axis=0, out=cu[1:])
    np.cumsum(ev, axis=1, out=cv[:, 1:])
    FA = (cu[:, j0] - cu[i0, j0])[:, None] + (cv - cv[:, j0][:, None])
    FB = (cv[i0, :] - cv[i0, j0])[None, :] + (cu - cu[i0, :][None, :])
    return FA, FB


def propagate_signs(lam, i0, j0):
    """Breadth-first sign fixing of a sign-ambiguous quaternion field.

    The base sample keeps its sign.  Every other sample is flipped if its
    inner product with the sum of its already-fixed 4-neighbours is
    negative.  Returns a new array.
    """
    out = np.array(lam, dtype=float, copy=True)
    nu, nv = out.shape[:2]
    done = np.zeros((nu, nv), dtype=bool)
    done[i0, j0] = True
    queue = deque([(i0, j0)])
    steps = ((-1, 0), (1, 0), (0, -1), (0, 1))
    while queue:
        i, j = queue.popleft()
        for di, dj in steps:
            a, b = i + di, j + dj
            if a < 0 or a >= nu or b < 0 or b >= nv or done[a, b]:
                continue
            acc = np.zeros(4)
            for ei, ej in steps:
                c, d = a + ei, b + ej
                if 0 <= c < nu and 0 <= d < nv and done[c, d]:
                    acc += out[c, d]
            if float(acc @ out[a, b]) < 0.0:
                out[a, b] = -out[a, b]
            done[a, b] = True
            queue.append((a, b))
    return out
