"""Run configuration: flat key=value files with # comments.

Every numeric field is validated against the solver preconditions
before any computation starts; validation failures name the field.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .grid import make_grid
from .solver import InitialDataSpec, ModelParams


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


@dataclass
class RunConfig:
    model: str = "MHD"
    Nx: int = 64
    Ny: int = 64
    Ly: float = 4.0
    nu: float = 0.1
    eta: float = 0.1
    dt: float = 1e-3
    T: float = 1.0
    record_every: int = 1
    kind: str = "random_band"
    amplitude: float = 1.0
    delta: float | None = None
    seed: int = 0
    mode_x: int = 1
    mode_y: int = 0
    bandwidth: int = 4
    snapshot_every: int = 0
    sobolev_s: tuple[float, ...] = (1.0, 2.0)
    cfl: float = 0.5
    outdir: str = "amhd_run"

    def validate(self) -> None:
        if self.model.upper() not in ("MHD", "TCM"):
            raise ConfigError("model", f"must be MHD or TCM, got {self.model!r}")
        for name in ("Nx", "Ny"):
            n = getattr(self, name)
            if n < 4 or n % 2 != 0:
                raise ConfigError(name, f"must be even and >= 4, got {n}")
        if not self.Ly > 0:
            raise ConfigError("Ly", f"must be positive, got {self.Ly}")
        for name in ("nu", "eta"):
            v = getattr(self, name)
            if v < 0:
                raise ConfigError(name, f"must be >= 0, got {v}")
        if not self.dt > 0:
            raise ConfigError("dt", f"must be positive, got {self.dt}")
        if self.T < 0:
            raise ConfigError("T", f"must be >= 0, got {self.T}")
        if self.record_every < 1:
            raise ConfigError("record_every", f"must be >= 1, got {self.record_every}")
        if self.kind not in ("single_mode", "gaussian_packet", "random_band"):
            raise ConfigError("kind", f"unknown initial-data kind {self.kind!r}")
        if self.amplitude < 0:
            raise ConfigError("amplitude", f"must be >= 0, got {self.amplitude}")
        if self.delta is not None and self.delta <= 0:
            raise ConfigError("delta", f"must be positive when set, got {self.delta}")
        if self.delta is not None and self.amplitude == 0:
            raise ConfigError("amplitude", "zero amplitude cannot meet a delta target")
        if self.bandwidth < 1:
            raise ConfigError("bandwidth", f"must be >= 1, got {self.bandwidth}")
        if self.snapshot_every < 0:
            raise ConfigError("snapshot_every", f"must be >= 0, got {self.snapshot_every}")
        if not self.sobolev_s:
            raise ConfigError("sobolev_s", "needs at least one exponent")
        if not self.cfl > 0:
            raise ConfigError("cfl", f"must be positive, got {self.cfl}")

    # -- solver objects -----------------------------------------------------

    def grid(self):
        return make_grid(self.Nx, self.Ny, self.Ly)

    def params(self) -> ModelParams:
        return ModelParams(model=self.model.upper(), nu=self.nu, eta=self.eta)

    def initial_spec(self) -> InitialDataSpec:
        return InitialDataSpec(
            kind=self.kind,
            amplitude=self.amplitude,
            seed=self.seed,
            mode=(self.mode_x, self.mode_y),
            bandwidth=self.bandwidth,
            delta=self.delta,
        )

    def with_value(self, name: str, value: float) -> "RunConfig":
        """Copy with one numeric field replaced (sweep axis)."""
        ftypes = {f.name: f.type for f in fields(RunConfig)}
        if name not in ftypes:
            raise ConfigError(name, "not a configuration field")
        if name in ("model", "kind", "outdir", "sobolev_s"):
            raise ConfigError(name, "not a numeric sweep axis")
        if name in ("Nx", "Ny", "record_every", "seed", "mode_x", "mode_y",
                    "bandwidth", "snapshot_every"):
            value = int(value)
        return replace(self, **{name: value})

    def as_text(self) -> str:
        lines = []
        for f in fields(RunConfig):
            v = getattr(self, f.name)
            if f.name == "sobolev_s":
                v = ",".join(f"{s:g}" for s in v)
            elif v is None:
                v = "none"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_INT_FIELDS = {"Nx", "Ny", "record_every", "seed", "mode_x", "mode_y",
               "bandwidth", "snapshot_every"}
_FLOAT_FIELDS = {"Ly", "nu", "eta", "dt", "T", "amplitude", "cfl"}


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in known:
            raise ConfigError(key, "unknown configuration key")
        try:
            if key in _INT_FIELDS:
                parsed = int(value)
            elif key in _FLOAT_FIELDS:
                parsed = float(value)
            elif key == "delta":
                parsed = None if value.lower() in ("none", "") else float(value)
            elif key == "sobolev_s":
                parsed = tuple(float(x) for x in value.split(",") if x.strip())
            elif key == "model":
                parsed = value.upper()
            else:
                parsed = value
        except ValueError as err:
            raise ConfigError(key, f"cannot parse {value!r}: {err}") from None
        setattr(cfg, key, parsed)
    return cfg


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
