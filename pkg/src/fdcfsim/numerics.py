"""Shared complex-matrix primitives.

Hermitian linear solves with ridge fallback, pilot-subspace projection,
bisection for power-constraint multipliers, dB conversions, and the seeded
complex-Gaussian sampling contract. All powers are handled in linear watts;
dB enters only at the configuration boundary.
"""

import numpy as np

from . import kernels


class ContractViolation(ValueError):
    """Raised when a caller breaks an operation precondition."""


HERMITIAN_RTOL = 1e-10
DEFAULT_RIDGE_SCALE = 1e-12
DEFAULT_BISECT_TOL = 1e-6
BISECT_MAX_HALVINGS = 200


def db_to_linear(x_db):
    """10^(x/10); dB value to dimensionless linear ratio."""
    return 10.0 ** (x_db / 10.0)


def dbm_to_watts(x_dbm):
    """dBm to watts."""
    return db_to_linear(x_dbm) / 1e3


def linear_to_db(x):
    return 10.0 * np.log10(x)


class RngStream:
    """Deterministic random stream keyed by (seed, stream_id).

    Identical keys reproduce identical draw sequences independently of
    process/thread layout; distinct stream ids give independent streams.
    Instances are not shared across threads.
    """

    def __init__(self, seed, stream_id=0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.gen = np.random.Generator(np.random.PCG64(ss))


def draw_complex_gaussian(rng, rows, cols, variance):
    """(rows, cols) i.i.d. circularly-symmetric complex Gaussians, E|x|^2 = variance."""
    return complex_gaussian(rng, (rows, cols), variance)


def complex_gaussian(rng, shape, variance):
    """Arbitrary-shape version of draw_complex_gaussian; variance 0 draws nothing."""
    if variance < 0:
        raise ContractViolation(f"negative variance {variance}")
    if variance == 0:
        return np.zeros(shape, dtype=np.complex128)
    z = rng.gen.standard_normal((2,) + tuple(shape))
    return np.sqrt(variance / 2.0) * (z[0] + 1j * z[1])


def hermitian_solve(a, b, ridge_scale=DEFAULT_RIDGE_SCALE):
    """Solve A x = b for Hermitian PSD A.

    Singular systems are re-solved with a ridge eps*I, eps = ridge_scale *
    trace(A)/n. b may be a vector or a matrix of stacked right-hand sides.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractViolation(f"matrix not square: {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ContractViolation(f"dimension mismatch: {a.shape} vs {b.shape}")
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.conj().T) > HERMITIAN_RTOL * max(scale, 1e-300):
        raise ContractViolation("matrix not Hermitian within tolerance")
    try:
        return kernels.cholesky_solve(a, b)
    except np.linalg.LinAlgError:
        pass
    eps = ridge_scale * float(np.trace(a).real) / a.shape[0]
    if eps > 0:
        try:
            return kernels.shifted_solve(a, b, eps)
        except np.linalg.LinAlgError:
            pass
    return np.linalg.lstsq(a, b if b.ndim > 1 else b[:, None], rcond=None)[0].reshape(b.shape)


def shifted_solve(a, b, shift, ridge_scale=DEFAULT_RIDGE_SCALE):
    """Solve (A + shift*I) x = b with the same ridge fallback as hermitian_solve."""
    try:
        return kernels.shifted_solve(a, b, shift)
    except np.linalg.LinAlgError:
        pass
    eps = ridge_scale * (float(np.trace(a).real) / a.shape[0] + shift)
    if eps <= 0:
        eps = ridge_scale
    return kernels.shifted_solve(a, b, shift + eps)


def shifted_power(a, b, shift, ridge_scale=DEFAULT_RIDGE_SCALE):
    """||(A + shift*I)^-1 b||_F^2 with ridge fallback."""
    x = shifted_solve(a, b, shift, ridge_scale)
    return float(np.sum(np.abs(x) ** 2))


def project_pilot_subspace(y, pi, tau):
    """Project the received block Y (N x tau) onto the pilot columns of Pi.

    Pi (tau x L) must have orthogonal columns with Pi^H Pi = tau*I. Returns
    Y Pi Pi^H / tau; idempotent for valid Pi.
    """
    y = np.asarray(y)
    pi = np.asarray(pi)
    if pi.shape[0] != tau or y.shape[-1] != tau:
        raise ContractViolation(f"pilot length mismatch: {y.shape} {pi.shape} tau={tau}")
    if pi.shape[1]:
        gram = pi.conj().T @ pi
        if np.linalg.norm(gram - tau * np.eye(pi.shape[1])) > 1e-8 * tau:
            raise ContractViolation("pilot columns not orthogonal with norm^2 = tau")
    return (y @ pi) @ pi.conj().T / tau


def bisect_power_multiplier(eval_power, budget, tol=DEFAULT_BISECT_TOL):
    """Smallest lambda >= 0 with eval_power(lambda) <= budget (to relative tol).

    eval_power must be strictly decreasing with eval_power(inf) -> 0. Returns
    0 when the constraint is already inactive (complementary slackness).
    """
    p0 = eval_power(0.0)
    if not np.isfinite(p0):
        raise ContractViolation("eval_power(0) is not finite")
    if p0 <= budget:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(BISECT_MAX_HALVINGS):
        if eval_power(hi) < budget:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ContractViolation("bisection bracket not found; eval_power not decreasing to 0?")
    lam = hi
    for _ in range(BISECT_MAX_HALVINGS):
        lam = 0.5 * (lo + hi)
        p = eval_power(lam)
        if abs(p - budget) <= tol * budget:
            return lam
        if p > budget:
            lo = lam
        else:
            hi = lam
    return hi
