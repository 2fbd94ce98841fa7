import numpy as np


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """
    Returns a PCG64 generator for one independent stream of a seed.

    Args:
        - seed An integer in [0, 2**64).
        - stream Index of the stream. Densities and sample elements use
          different streams, so samples can be regenerated without
          redrawing the densities.
    """
    sequence = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.PCG64(sequence))


def gaussian(rng: np.random.Generator, count: int) -> np.ndarray:
    """
    Standard normal samples by the Box-Muller transform.

    All radius uniforms are drawn before all angle uniforms, so the output
    depends only on the generator state and ``count``.
    """
    radius_u = rng.random(count)
    angle_u = rng.random(count)
    # 1 - u lies in (0, 1]
    radius = np.sqrt(-2.0 * np.log1p(-radius_u))
    return radius * np.cos(2.0 * np.pi * angle_u)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """
    Complex Gaussian array with ``E|z|^2 = 1``; real parts are drawn before
    imaginary parts.
    """
    size = int(np.prod(shape))
    values = gaussian(rng, 2 * size)
    z = (values[:size] + 1j * values[size:]) / np.sqrt(2.0)
    return z.reshape(shape)


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    g = complex_gaussian(rng, (n, n))
    return (g + g.conj().T) / 2


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """
    Haar-distributed unitary from the QR decomposition of a complex
    Gaussian matrix with the phases of R divided out.
    """
    q, r = np.linalg.qr(complex_gaussian(rng, (n, n)))
    d = np.diag(r)
    phases = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * phases[None, :]


def encode_matrix(m) -> list:
    """
    Encodes a complex matrix as row-major nested lists of ``[re, im]``
    pairs.
    """
    arr = np.asarray(m, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in arr]


def decode_matrix(data) -> np.ndarray:
    """
    The inverse of :func:`encode_matrix`.
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValueError(
            f"expected rows of [re, im] pairs, got shape {arr.shape}"
        )
    return arr[..., 0] + 1j * arr[..., 1]
