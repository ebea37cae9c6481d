"""Complex vector/matrix primitives for the simulator.

Conventions
-----------
Every transform here is the *unitary* DFT pair (symmetric 1/sqrt(N)
normalization).  The one exception in the code base is the phase-noise
spectrum, which uses a 1/N-forward convention and lives in
:mod:`pnofdm.phase_noise`.

Circular (de)convolution is implemented through FFT products, which is
exact up to rounding for any length (numpy's pocketfft handles non
power-of-two sizes with Bluestein's algorithm).
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SingularDeconvolutionError",
    "SingularMatrixError",
    "RandomSource",
    "dft_unitary",
    "idft_unitary",
    "circ_convolve",
    "circ_deconvolve",
    "circulant_from",
    "circulant_eigs",
    "hermitian_solve",
]


class SingularDeconvolutionError(ArithmeticError):
    """A time-domain sample of the divisor is (numerically) zero.

    In the receiver chain this signals a degenerate phase-noise estimate:
    genuine unit-modulus PN time samples can never reach zero.
    """


class SingularMatrixError(ArithmeticError):
    """Cholesky pivot collapsed: the matrix is not positive definite."""


@dataclass(frozen=True)
class RandomSource:
    """Seedable, stream-splittable randomness contract.

    Identical ``(seed, stream)`` pairs yield bit-identical draws; distinct
    streams are statistically independent (numpy ``SeedSequence`` spawn
    keys).  Instances are single-owner: one per Monte Carlo trial, never
    shared between concurrent workers.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream: int) -> "RandomSource":
        return RandomSource(self.seed, stream)


def as_generator(rng) -> np.random.Generator:
    """Accept either a RandomSource or a ready numpy Generator."""
    if isinstance(rng, RandomSource):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RandomSource or numpy Generator, got {type(rng)!r}")


def _vector(v, name="input") -> np.ndarray:
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must not be empty")
    return arr


def dft_unitary(v) -> np.ndarray:
    """Forward unitary DFT: V_k = (1/sqrt(N)) sum_n v_n e^{-j2pi kn/N}."""
    arr = _vector(v)
    return np.fft.fft(arr) / np.sqrt(arr.size)


def idft_unitary(v) -> np.ndarray:
    """Inverse unitary DFT: v_n = (1/sqrt(N)) sum_k V_k e^{+j2pi kn/N}."""
    arr = _vector(v)
    return np.fft.ifft(arr) * np.sqrt(arr.size)


def circ_convolve(a, b) -> np.ndarray:
    """Circular convolution (a (*) b)_k = sum_l a_l b_{(k-l) mod N}."""
    av = _vector(a, "a")
    bv = _vector(b, "b")
    if av.size != bv.size:
        raise ValueError(f"length mismatch: {av.size} vs {bv.size}")
    return np.fft.ifft(np.fft.fft(av) * np.fft.fft(bv))


def time_samples(x) -> np.ndarray:
    """sqrt(N)-scaled inverse unitary DFT of ``x``.

    For a 1/N-convention spectrum this recovers the original time-domain
    sequence; its entries are the divisors of :func:`circ_deconvolve`.
    """
    xv = _vector(x, "x")
    return xv.size * np.fft.ifft(xv)


def circ_deconvolve(z, x, tol: float | None = None) -> np.ndarray:
    """Invert ``x (*) y = z`` for ``y``.

    Works in the dual domain: y = DFT(IDFT(z) / x_t) with
    x_t = sqrt(N) * IDFT_unitary(x).  For a scaled divisor ``c*x`` the
    result is ``y/c``.

    ``tol`` guards the division; it defaults to 1e-9 * max|x_t|, so
    unit-modulus phase-noise sequences can never trip it while corrupted
    estimates with a time-domain zero crossing do.
    """
    zv = _vector(z, "z")
    xv = _vector(x, "x")
    if zv.size != xv.size:
        raise ValueError(f"length mismatch: {zv.size} vs {xv.size}")
    xt = xv.size * np.fft.ifft(xv)
    mags = np.abs(xt)
    if tol is None:
        tol = 1e-9 * mags.max()
    if np.any(mags <= tol):
        raise SingularDeconvolutionError(
            f"divisor has a time-domain sample with magnitude <= {tol:.3e}"
        )
    return np.fft.fft(np.fft.ifft(zv) / xt)


def circulant_from(c) -> np.ndarray:
    """Circulant matrix with first column ``c``: C[i, j] = c[(i-j) mod N]."""
    cv = _vector(c, "c")
    n = cv.size
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return cv[idx]


def circulant_eigs(c) -> np.ndarray:
    """Eigenvalues lambda_k = sum_l c_l e^{+j2pi kl/N} of circulant_from(c).

    With the forward unitary DFT matrix D, circulant_from(c) equals
    D diag(lambda) D^H exactly; lambda equals sqrt(N)*dft_unitary(c) up to
    the index reversal k <-> (N-k) mod N.
    """
    cv = _vector(c, "c")
    return cv.size * np.fft.ifft(cv)


def hermitian_solve(a, b, max_dim: int = 64) -> np.ndarray:
    """Solve A X = B for Hermitian positive-definite A via Cholesky.

    Intended for the small LMMSE core matrices (N_p, N_c at most a few
    hundred); ``max_dim`` rejects accidental large solves.  Raises
    SingularMatrixError when the smallest pivot drops below
    1e-14 * ||A||_F.
    """
    A = np.asarray(a, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    n = A.shape[0]
    if n == 0:
        raise ValueError("A must not be empty")
    if n > max_dim:
        raise ValueError(f"dimension {n} exceeds small-matrix bound {max_dim}")
    scale = np.abs(A).max()
    if not np.allclose(A, A.conj().T, rtol=0.0, atol=1e-12 * max(scale, 1.0)):
        raise ValueError("A is not Hermitian within tolerance")

    B = np.asarray(b, dtype=np.complex128)
    b_was_vector = B.ndim == 1
    if b_was_vector:
        B = B[:, None]
    if B.shape[0] != n:
        raise ValueError(f"B has {B.shape[0]} rows, expected {n}")

    pivot_floor = 1e-14 * np.linalg.norm(A)
    L = np.zeros_like(A)
    for j in range(n):
        d = A[j, j].real - np.sum(np.abs(L[j, :j]) ** 2)
        if d < pivot_floor:
            raise SingularMatrixError(
                f"pivot {d:.3e} below 1e-14*||A|| at column {j}: not positive definite"
            )
        L[j, j] = np.sqrt(d)
        if j + 1 < n:
            L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j].conj()) / L[j, j]

    # forward substitution L Y = B, then back substitution L^H X = Y
    Y = np.zeros_like(B)
    for i in range(n):
        Y[i] = (B[i] - L[i, :i] @ Y[:i]) / L[i, i]
    X = np.zeros_like(B)
    for i in range(n - 1, -1, -1):
        X[i] = (Y[i] - L[i + 1:, i].conj() @ X[i + 1:]) / L[i, i].conj()
    return X[:, 0] if b_was_vector else X
