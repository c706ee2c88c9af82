import functools
import random

from hbavss.polycommit import setup


@functools.lru_cache(maxsize=None)
def params(t: int, backend: str = "pairing", seed: int = 0):
    return setup(t, random.Random(seed), backend)
