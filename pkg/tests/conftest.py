"""Shared oracles and helpers.

Oracles here are deliberately independent of the package internals: full
symmetric tensors are built by explicit permutation sums, contractions by
einsum on those full tensors, and minors by numpy determinants, so the
compressed-coordinate code paths are checked against first principles.
"""

import itertools
import math

import numpy as np
import pytest

from linsect.seeding import gaussian, rng_for


def full_symmetrize(vectors):
    """(1/d!) sum over permutations of v_{s(1)} x ... x v_{s(d)}."""
    d = len(vectors)
    n = len(vectors[0])
    dtype = complex if any(np.iscomplexobj(v) for v in vectors) else float
    acc = np.zeros((n,) * d, dtype=dtype)
    for perm in itertools.permutations(range(d)):
        outer = np.array(1.0, dtype=dtype)
        for k in perm:
            outer = np.multiply.outer(outer, vectors[k])
        acc += outer
    return acc / math.factorial(d)


def match_error(target, pool):
    """1 - best |normalized correlation| of target against a pool of vectors."""
    t = np.asarray(target)
    t = t / np.linalg.norm(t)
    best = max(abs(np.vdot(t, v / np.linalg.norm(v))) for v in pool)
    return max(0.0, 1.0 - float(best))


def planted_cp_tensor(dims, rank, seed, field="R"):
    """Tensor with independent Gaussian CP factors, plus the factors."""
    rng = rng_for(seed, "cp-oracle")
    factors = [gaussian(rng, (n, rank), field) for n in dims]
    subscripts = ",".join(f"{chr(ord('i') + k)}a" for k in range(len(dims)))
    target = "".join(chr(ord("i") + k) for k in range(len(dims)))
    tensor = np.einsum(f"{subscripts}->{target}", *factors)
    return tensor, factors


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
