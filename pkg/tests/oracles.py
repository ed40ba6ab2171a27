"""Independent numerical oracles used by the test suite.

Everything here is self-contained on purpose: energies, the corrector, and
the generator's drift coefficients are re-implemented from their defining
formulas in extended precision (np.longdouble), sharing no derivative code
with the package.  The finite-difference application of the generator is
the reference that the package's closed-form expressions are checked
against.
"""

from __future__ import annotations

import numpy as np

LD = np.longdouble


def _as_ld(x):
    return np.asarray(x, dtype=LD)


def potential_value_ld(pot, q):
    """V(q) rebuilt in long double for the shipped potential forms."""
    q = _as_ld(q)
    r2 = np.sum(q * q, axis=-1)
    kind = type(pot).__name__
    if kind == "Quadratic":
        return LD(pot.omega) * r2
    if kind == "DoubleWell":
        return LD(0.25) * (LD(1.0) - r2) ** 2
    if kind == "UserTable":
        return _as_ld(pot.value(np.asarray(q, dtype=float)))
    raise AssertionError(f"oracle does not know potential {kind}")


def potential_gradient_ld(pot, q):
    q = _as_ld(q)
    kind = type(pot).__name__
    if kind == "Quadratic":
        return LD(2.0) * LD(pot.omega) * q
    if kind == "DoubleWell":
        r2 = np.sum(q * q, axis=-1)
        return -(LD(1.0) - r2)[..., None] * q
    if kind == "UserTable":
        return _as_ld(pot.gradient(np.asarray(q, dtype=float)))
    raise AssertionError(f"oracle does not know potential {kind}")


def _kernel_terms(kernel):
    family = kernel.family.value
    if family == "coulomb":
        d = kernel.dimension
        if d == 2:
            value = lambda r: -np.log(r)
        else:
            value = lambda r: r ** LD(2 - d)
        grad_exponent = LD(d)
        grad_scale = LD(1.0) if (kernel.normalization.value == "paper" or d == 2) \
            else LD(d - 2)
    elif family == "riesz":
        s = LD(kernel.s)
        value = lambda r: r ** (-s)
        grad_exponent = s + LD(2.0)
        grad_scale = LD(1.0) if kernel.normalization.value == "paper" else s
    else:  # log1d
        value = lambda r: -np.log(r)
        grad_exponent = LD(2.0)
        grad_scale = LD(1.0)
    return value, grad_exponent, grad_scale


def hamiltonian_ld(params, q, p):
    """H = |p|^2/2 + sum_i V(q_i) + (1/2N) sum_{i != j} K(q_i - q_j)."""
    q, p = _as_ld(q), _as_ld(p)
    n = params.N
    value, _, _ = _kernel_terms(params.kernel)
    h = LD(0.5) * np.sum(p * p) + np.sum(potential_value_ld(params.potential, q))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            r = np.sqrt(np.sum((q[i] - q[j]) ** 2))
            h += value(r) / (LD(2.0) * LD(n))
    return h


def psi_ld(params, lp, q, p):
    """Psi = -(b/N) sum_{i != j} (p_i-p_j).(q_i-q_j)/r_ij + c p.q (ordered)."""
    q, p = _as_ld(q), _as_ld(p)
    n = params.N
    total = LD(0.0)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            dq = q[i] - q[j]
            r = np.sqrt(np.sum(dq * dq))
            total += np.sum((p[i] - p[j]) * dq) / r
    return -(LD(lp.b) / LD(n)) * total + LD(lp.c) * np.sum(p * q)


def grad_u_ld(params, q):
    """Drift coefficient dU/dq_i of the generator, per the kernel convention."""
    q = _as_ld(q)
    n = params.N
    _, grad_exponent, grad_scale = _kernel_terms(params.kernel)
    grad = potential_gradient_ld(params.potential, q).copy()
    for i in range(n):
        acc = np.zeros(params.d, dtype=LD)
        for j in range(n):
            if i == j:
                continue
            dq = q[i] - q[j]
            r = np.sqrt(np.sum(dq * dq))
            acc += -grad_scale * dq / r ** grad_exponent
        grad[i] += acc / LD(n)
    return grad


def fd_generator_ratio(params, lp, state, h=1e-5):
    """L W / W at a state, with all W-derivatives taken by finite differences.

    Uses the normalized function G(x) = exp(F(x) - F(x0)), F = a H + Psi,
    which equals W/W(x0); first derivatives by central differences, the
    momentum Laplacian by second differences, all in long double so the
    h^-2 cancellation stays far below the comparison tolerance.
    """
    hq = LD(h)
    q0 = _as_ld(state.q)
    p0 = _as_ld(state.p)
    a = LD(lp.a)

    def F(q, p):
        return a * hamiltonian_ld(params, q, p) + psi_ld(params, lp, q, p)

    f0 = F(q0, p0)

    def g_shift(dq, dp):
        return np.expm1(F(q0 + dq, p0 + dp) - f0)

    n, d = q0.shape
    grad_q = np.zeros((n, d), dtype=LD)
    grad_p = np.zeros((n, d), dtype=LD)
    lap_p = LD(0.0)
    for i in range(n):
        for k in range(d):
            eq = np.zeros((n, d), dtype=LD)
            eq[i, k] = hq
            gp_ = g_shift(eq, 0.0)
            gm_ = g_shift(-eq, 0.0)
            grad_q[i, k] = (gp_ - gm_) / (2 * hq)
            gpp = g_shift(0.0, eq)
            gpm = g_shift(0.0, -eq)
            grad_p[i, k] = (gpp - gpm) / (2 * hq)
            lap_p += (gpp + gpm) / (hq * hq)

    drift = grad_u_ld(params, q0)
    value = (
        np.sum(p0 * grad_q)
        - LD(params.gamma) * np.sum(p0 * grad_p)
        - np.sum(drift * grad_p)
        + LD(params.gamma) / LD(params.beta) * lap_p
    )
    return float(value)


def fd_gradient(fn, x, h=1e-6):
    """Central-difference gradient of a scalar function of an array."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    flat = out.reshape(-1)
    xf = x.reshape(-1)
    for k in range(xf.size):
        step = np.zeros_like(xf)
        step[k] = h
        flat[k] = (fn((xf + step).reshape(x.shape))
                   - fn((xf - step).reshape(x.shape))) / (2 * h)
    return out


def brute_force_min(fn, lo, hi, n=200001):
    """Dense-grid minimum of a scalar function on [lo, hi], with refinement."""
    xs = np.linspace(lo, hi, n)
    vals = fn(xs)
    i = int(np.argmin(vals))
    left = xs[max(0, i - 2)]
    right = xs[min(n - 1, i + 2)]
    xs2 = np.linspace(left, right, 20001)
    vals2 = fn(xs2)
    j = int(np.argmin(vals2))
    return float(xs2[j]), float(vals2[j])
