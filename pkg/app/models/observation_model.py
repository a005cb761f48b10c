import os
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from app.utils.errors import DegenerateInput
from app.utils.logger import logger

SIGNAL_SUBKEY = 0
NOISE_SUBKEY = 1


@dataclass(frozen=True)
class Seed:
    """Replication seed; each (master, stream, subkey) triple keys its own generator"""
    master: int
    stream: int = 0

    def rng(self, subkey):
        return np.random.default_rng(np.random.SeedSequence([int(self.master), int(self.stream), int(subkey)]))


@dataclass(frozen=True)
class ObservationMeta:
    n: int
    scheme: str = "equidistant"
    seed_master: int | None = None
    seed_stream: int | None = None
    model_tag: str = "E0"
    h_inv: int | None = None
    preset: str | None = None

    def to_lines(self):
        return [f"# {key}={'' if value is None else value}" for key, value in asdict(self).items()]

    @classmethod
    def from_pairs(cls, pairs):
        def as_int(value):
            return None if value in (None, "") else int(value)

        return cls(
            n=int(pairs["n"]),
            scheme=pairs.get("scheme") or "equidistant",
            seed_master=as_int(pairs.get("seed_master")),
            seed_stream=as_int(pairs.get("seed_stream")),
            model_tag=pairs.get("model_tag") or "E0",
            h_inv=as_int(pairs.get("h_inv")),
            preset=pairs.get("preset") or None,
        )


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """Two synchronous noisy price series on n + 1 times in [0, 1]"""
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    meta: ObservationMeta

    def __post_init__(self):
        for name in ("times", "x", "y"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        if not (self.times.ndim == self.x.ndim == self.y.ndim == 1):
            raise DegenerateInput("observation series must be one-dimensional")
        if not (len(self.times) == len(self.x) == len(self.y)):
            raise DegenerateInput("times, x and y must have equal length")
        if len(self.times) != self.meta.n + 1:
            raise DegenerateInput(f"expected {self.meta.n + 1} observations, got {len(self.times)}")
        if np.any(np.diff(self.times) <= 0):
            raise DegenerateInput("observation times must be strictly increasing")
        if self.times[0] != 0.0 or self.times[-1] != 1.0:
            raise DegenerateInput("observation times must start at 0 and end at 1")

    @property
    def n(self):
        return self.meta.n

    def increments(self):
        return np.diff(self.x), np.diff(self.y)

    def to_frame(self):
        return pd.DataFrame({"t": self.times, "x": self.x, "y": self.y})

    def write_csv(self, path):
        """Write `# key=value` meta lines followed by a t,x,y table at 17 significant digits"""
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", newline="") as handle:
            handle.write("\n".join(self.meta.to_lines()) + "\n")
            self.to_frame().to_csv(handle, index=False, float_format="%.17g", lineterminator="\n")
        logger.info(f"Wrote {self.n + 1} observations to {path}")

    @classmethod
    def read_csv(cls, path):
        pairs = {}
        with open(path) as handle:
            for line in handle:
                if not line.startswith("#"):
                    break
                key, _, value = line[1:].strip().partition("=")
                pairs[key.strip()] = value.strip()
        frame = pd.read_csv(path, comment="#", float_precision="round_trip")
        missing = {"t", "x", "y"} - set(frame.columns)
        if missing:
            raise DegenerateInput(f"observation file {path} lacks columns {sorted(missing)}")
        if "n" not in pairs:
            pairs["n"] = str(len(frame) - 1)
        meta = ObservationMeta.from_pairs(pairs)
        logger.info(f"Read {len(frame)} observations from {path}")
        return cls(frame["t"].to_numpy(), frame["x"].to_numpy(), frame["y"].to_numpy(), meta)
