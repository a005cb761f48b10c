import math
from dataclasses import dataclass

from app.utils.errors import BadGeometry
from app.utils.logger import logger

DEFAULT_R_RATIO = 3
DEFAULT_K = 5


@dataclass(frozen=True)
class BlockGeometry:
    """Block layout of the spectral estimators

    Blocks have length h = 1 / h_inv and hold nh = n / h_inv increments.
    Pilot estimates live on coarse blocks of length r = r_ratio * h and are
    smoothed over K adjacent blocks. J is the spectral cut-off.
    """
    n: int
    h_inv: int
    J: int
    r_ratio: int = DEFAULT_R_RATIO
    K: int = DEFAULT_K

    def __post_init__(self):
        problems = []
        if self.n < 2:
            problems.append(f"n={self.n} must be at least 2")
        if self.h_inv < 1:
            problems.append(f"h_inv={self.h_inv} must be positive")
        elif self.n % self.h_inv != 0:
            problems.append(f"n*h = {self.n}/{self.h_inv} is not an integer")
        elif self.n // self.h_inv < 2:
            problems.append(f"blocks must hold at least two increments, got nh={self.n // self.h_inv}")
        elif not 1 <= self.J <= self.n // self.h_inv:
            problems.append(f"cut-off J={self.J} must lie in [1, nh={self.n // self.h_inv}]")
        if self.r_ratio < 1 or (self.h_inv >= 1 and self.r_ratio > self.h_inv):
            problems.append(f"r/h={self.r_ratio} must lie in [1, h_inv]")
        if self.K < 1:
            problems.append(f"K={self.K} must be positive")
        if problems:
            logger.error(f"Invalid block geometry: {'; '.join(problems)}")
            raise BadGeometry("; ".join(problems))

    @property
    def h(self):
        return 1.0 / self.h_inv

    @property
    def nh(self):
        return self.n // self.h_inv

    @property
    def r(self):
        return self.r_ratio / self.h_inv

    @property
    def n_coarse(self):
        """Number of coarse grid points l*r that some block maps to"""
        return (self.h_inv - 1) // self.r_ratio + 1

    @classmethod
    def default(cls, n, r_ratio=DEFAULT_R_RATIO, K=DEFAULT_K, J=None):
        """h_inv = the divisor of n nearest to round(sqrt(n) / log n), J = nh"""
        if n < 4:
            raise BadGeometry(f"n={n} is too small for a default block geometry")
        target = max(1, round(math.sqrt(n) / math.log(n)))
        divisors = [d for d in range(1, n // 2 + 1) if n % d == 0]
        h_inv = min(divisors, key=lambda d: (abs(d - target), d))
        nh = n // h_inv
        return cls(n=n, h_inv=h_inv, J=nh if J is None else J, r_ratio=min(r_ratio, h_inv), K=min(K, h_inv))

    @staticmethod
    def auto_cutoff(n, nh):
        """Spectral cut-off ceil(sqrt(n) log n), capped at nh"""
        return min(nh, math.ceil(math.sqrt(n) * math.log(n)))

    def with_cutoff(self, J):
        return BlockGeometry(self.n, self.h_inv, J, self.r_ratio, self.K)

    def to_dict(self):
        return {"n": self.n, "h_inv": self.h_inv, "J": self.J, "r_ratio": self.r_ratio, "K": self.K}
