"""Reproducible, splittable random streams and chunked Monte-Carlo loops.

Every Monte-Carlo routine takes a ``numpy.random.Generator`` and splits it
into one child stream per fixed-size chunk of replications.  The chunk size
does not depend on the thread count, so estimates are bit-identical however
many worker threads are used.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 4096


def make_rng(seed, *key):
    """Generator for ``seed``; ``key`` names an independent sub-stream."""
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def chunk_sizes(n, chunk=CHUNK):
    full, rest = divmod(int(n), chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn, n, rng, threads=1, chunk=CHUNK):
    """Call ``fn(size, stream)`` once per chunk and concatenate the results in order."""
    sizes = chunk_sizes(n, chunk)
    streams = rng.spawn(len(sizes))
    if threads <= 1 or len(sizes) == 1:
        parts = [fn(k, s) for k, s in zip(sizes, streams)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(fn, sizes, streams))
    return np.concatenate(parts)


def mean_and_se(samples):
    samples = np.asarray(samples, dtype=float)
    return float(samples.mean()), float(samples.std(ddof=1) / np.sqrt(samples.size))
