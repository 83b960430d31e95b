"""Compiled inner loops.  Random inputs are drawn by the caller and passed in, so a
walk's path depends only on its stream, never on chunking or threading."""
import math

import numba as nb
import numpy as np

_NEAR_E1 = 1e-8
_jit = nb.njit(cache=True, nogil=True, fastmath=False)


@_jit
def _unit_row(g, z):
    d = g.shape[0]
    s = 0.0
    for k in range(d):
        s += g[k] * g[k]
    s = math.sqrt(s)
    for k in range(d):
        z[k] = g[k] / s


@_jit
def _hat(x, u):
    d = x.shape[0]
    s = 0.0
    for k in range(d):
        s += x[k] * x[k]
    if s == 0.0:
        for k in range(d):
            u[k] = 0.0
        u[0] = 1.0
        return 0.0
    s = math.sqrt(s)
    for k in range(d):
        u[k] = x[k] / s
    return s


@_jit
def _apply_frame(u, w, out):
    # out = Q_u w for the Householder frame with Q_u e1 = u.
    d = u.shape[0]
    vv = 0.0
    for k in range(d):
        vk = u[k] - (1.0 if k == 0 else 0.0)
        vv += vk * vk
    nv = math.sqrt(vv)
    if nv <= 1e-12:
        for k in range(d):
            out[k] = w[k]
        return
    if nv < _NEAR_E1:
        # reflection through e1 + u composed with the flip of the first axis
        ww = 0.0
        dot = 0.0
        for k in range(d):
            wk = u[k] + (1.0 if k == 0 else 0.0)
            ww += wk * wk
            dot += wk * (-w[k] if k == 0 else w[k])
        for k in range(d):
            wk = u[k] + (1.0 if k == 0 else 0.0)
            src = -w[k] if k == 0 else w[k]
            out[k] = src - 2.0 * wk * dot / ww
        return
    dot = 0.0
    for k in range(d):
        vk = (1.0 if k == 0 else 0.0) - u[k]
        dot += vk * w[k]
    for k in range(d):
        vk = (1.0 if k == 0 else 0.0) - u[k]
        out[k] = w[k] - 2.0 * vk * dot / vv


@_jit
def advance_elliptic(x, a, b, normals, out):
    """Elliptic steps via the frame-free form b*sqrt(d)*z + (a-b)*sqrt(d)*u<u,z>."""
    n, d = normals.shape
    sd = math.sqrt(d)
    z = np.empty(d)
    u = np.empty(d)
    for i in range(n):
        _unit_row(normals[i], z)
        _hat(x, u)
        dot = 0.0
        for k in range(d):
            dot += u[k] * z[k]
        for k in range(d):
            x[k] += b * sd * z[k] + (a - b) * sd * u[k] * dot
            out[i, k] = x[k]


@_jit
def advance_tilted(x, a, b, alpha, normals, out):
    """Steps Q_u R(-alpha) D z with D = sqrt(d) diag(a, b, ..., b)."""
    n, d = normals.shape
    sd = math.sqrt(d)
    ca = math.cos(alpha)
    sa = math.sin(alpha)
    z = np.empty(d)
    u = np.empty(d)
    w = np.empty(d)
    inc = np.empty(d)
    for i in range(n):
        _unit_row(normals[i], z)
        _hat(x, u)
        dz0 = sd * a * z[0]
        dz1 = sd * b * z[1]
        # R(-alpha) acting on the (e1, e2) coordinates
        w[0] = ca * dz0 + sa * dz1
        w[1] = -sa * dz0 + ca * dz1
        for k in range(2, d):
            w[k] = sd * b * z[k]
        _apply_frame(u, w, inc)
        for k in range(d):
            x[k] += inc[k]
            out[i, k] = x[k]


@_jit
def advance_param2d(x, a, b, phis, out):
    n = phis.shape[0]
    s2 = math.sqrt(2.0)
    u = np.empty(2)
    for i in range(n):
        _hat(x, u)
        c = math.cos(phis[i])
        s = math.sin(phis[i])
        x0 = x[0] + s2 * a * u[0] * c - s2 * b * u[1] * s
        x1 = x[1] + s2 * a * u[1] * c + s2 * b * u[0] * s
        x[0] = x0
        x[1] = x1
        out[i, 0] = x0
        out[i, 1] = x1


@_jit
def advance_custom1d(x, edges, values, cumprobs, counts, uniforms, out):
    """Piecewise jump laws: piece j applies on [edges[j-1], edges[j])."""
    n = uniforms.shape[0]
    for i in range(n):
        xv = x[0]
        j = np.searchsorted(edges, xv, side="right")
        m = counts[j]
        k = 0
        while k < m - 1 and uniforms[i] >= cumprobs[j, k]:
            k += 1
        x[0] = xv + values[j, k]
        out[i, 0] = x[0]


@_jit
def radial_chunk(r, a, b, alpha, normals, out):
    """Norm recursion r' = sqrt(r^2 + 2 r s + q), s radial part and q squared length
    of the increment.  Returns the final radius."""
    n, d = normals.shape
    sd = math.sqrt(d)
    ca = math.cos(alpha)
    sa = math.sin(alpha)
    a2 = a * a
    b2 = b * b
    for i in range(n):
        g = normals[i]
        ss = 0.0
        for k in range(d):
            ss += g[k] * g[k]
        inv = 1.0 / math.sqrt(ss)
        z1 = g[0] * inv
        z2 = g[1] * inv if d > 1 else 0.0
        s = sd * (a * z1 * ca + b * z2 * sa)
        q = d * ((a2 - b2) * z1 * z1 + b2)
        arg = r * r + 2.0 * r * s + q
        r = math.sqrt(arg) if arg > 0.0 else 0.0
        out[i] = r
    return r


@_jit
def radial_chunk_phi(r, a, b, phis, out):
    n = phis.shape[0]
    a2 = a * a
    b2 = b * b
    for i in range(n):
        t = math.cos(phis[i])
        arg = r * r + 2.0 * math.sqrt(2.0) * a * r * t + 2.0 * ((a2 - b2) * t * t + b2)
        r = math.sqrt(arg) if arg > 0.0 else 0.0
        out[i] = r
    return r
