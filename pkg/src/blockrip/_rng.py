"""Named, splittable random streams.

Every random draw in the package goes through :func:`stream`, which maps a
master seed plus a tuple of stream keys onto an independent Philox
generator. Two calls with the same ``(seed, *keys)`` always return
generators that produce identical sequences, regardless of how many other
streams were created in between or on which worker they are consumed.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["stream", "key_of"]


def key_of(tag) -> int:
    """Map a stream key (int or str) onto a non-negative integer."""
    if isinstance(tag, (bool, np.bool_)):
        raise TypeError("boolean stream keys are ambiguous")
    if isinstance(tag, (int, np.integer)):
        if tag < 0:
            raise ValueError(f"stream keys must be non-negative, got {tag}")
        return int(tag)
    if isinstance(tag, str):
        # high bit keeps string tags disjoint from small integer keys
        return (1 << 40) | zlib.crc32(tag.encode("utf-8"))
    raise TypeError(f"unsupported stream key {tag!r}")


def _flatten(items):
    for it in items:
        if isinstance(it, tuple):
            yield from _flatten(it)
        else:
            yield it


def stream(seed, *keys) -> np.random.Generator:
    """Return the generator for stream ``(seed, *keys)``.

    ``seed`` may itself be a (nested) tuple, in which case it is flattened into
    the key path; this lets callers hand a stream id down to library functions
    that take a single ``seed`` argument.
    """
    flat = list(_flatten((seed, *keys)))
    seed, keys = flat[0], flat[1:]
    if seed is None:
        raise ValueError("an explicit seed is required for reproducible streams")
    ss = np.random.SeedSequence(entropy=key_of(seed), spawn_key=tuple(key_of(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))
