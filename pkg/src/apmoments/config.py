"""Experiment configuration: flat key = value files, flag overrides,
validation, and a deterministic round-trip emitter."""

import math
from dataclasses import dataclass, replace
from pathlib import Path

from .arith import is_prime
from .kloosterman import ProjectiveMap
from .smoothing import PROFILES

SCHEMA_VERSION = 1


class ValidationError(Exception):
    pass


_DEFAULTS = {
    "kind": "d",
    "primes": "",
    "prime_range": "",
    "x": "",
    "phi_c": "50",
    "phi_e": "0",
    "profile": "default",
    "w0": "",
    "w1": "",
    "gamma": "1,1,0,1",
    "kappa_max": "4",
    "lambda_max": "2",
    "residues": "10",
    "tuples": "30",
    "seed": "12345",
    "out": "out",
    "workers": "1",
    "format": "json",
}


@dataclass(frozen=True)
class ExperimentConfig:
    kinds: tuple
    primes: tuple
    x_window: int | None
    phi_c: float
    phi_e: float
    profile_name: str
    w0: float | None
    w1: float | None
    gamma: tuple
    kappa_max: int
    lambda_max: int
    residues: int
    tuples: int
    seed: int
    out: str
    workers: int
    fmt: str

    def x_for(self, p):
        """Window for prime p: explicit X, or floor(p^2 / (c log(p)^e))."""
        if self.x_window is not None:
            return self.x_window
        phi = self.phi_c * math.log(p) ** self.phi_e
        return int(p * p / phi)

    def weight_bounds(self):
        if self.w0 is not None:
            return (self.w0, self.w1)
        return PROFILES[self.profile_name]

    def gamma_map(self):
        return ProjectiveMap(*self.gamma)

    def emit(self):
        """Flat key = value text; load(emit(cfg)) == cfg."""
        lines = ["# apmoments experiment config"]
        lines.append(f"kind = {','.join(self.kinds)}")
        if self.primes:
            lines.append(f"primes = {','.join(str(p) for p in self.primes)}")
        if self.x_window is not None:
            lines.append(f"x = {self.x_window}")
        else:
            lines.append(f"phi_c = {self.phi_c:g}")
            lines.append(f"phi_e = {self.phi_e:g}")
        if self.w0 is not None:
            lines.append(f"w0 = {self.w0:g}")
            lines.append(f"w1 = {self.w1:g}")
        else:
            lines.append(f"profile = {self.profile_name}")
        lines.append(f"gamma = {','.join(str(v) for v in self.gamma)}")
        lines.append(f"kappa_max = {self.kappa_max}")
        lines.append(f"lambda_max = {self.lambda_max}")
        lines.append(f"residues = {self.residues}")
        lines.append(f"tuples = {self.tuples}")
        lines.append(f"seed = {self.seed}")
        lines.append(f"out = {self.out}")
        lines.append(f"workers = {self.workers}")
        lines.append(f"format = {self.fmt}")
        return "\n".join(lines) + "\n"


def _parse_file(path):
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key = value")
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def _expand_primes(spec_primes, spec_range):
    primes = []
    if spec_primes:
        primes.extend(int(tok) for tok in spec_primes.split(",") if tok)
    if spec_range:
        lo, _, hi = spec_range.partition(":")
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValidationError("prime_range must be lo:hi with lo <= hi")
        primes.extend(n for n in range(max(lo, 2), hi + 1) if is_prime(n))
    for p in primes:
        if not is_prime(p):
            raise ValidationError(f"{p} is not prime")
    return tuple(primes)


def load_config(path=None, overrides=None):
    """Config from file and/or CLI overrides; overrides win key-by-key."""
    data = dict(_DEFAULTS)
    explicit = set()
    if path is not None:
        fdata = _parse_file(path)
        unknown = set(fdata) - set(_DEFAULTS)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        data.update(fdata)
        explicit |= set(fdata)
    if overrides:
        unknown = set(overrides) - set(_DEFAULTS)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        clean = {k: str(v) for k, v in overrides.items() if v is not None}
        data.update(clean)
        explicit |= set(clean)
    if "x" in explicit and ({"phi_c", "phi_e"} & explicit):
        raise ValidationError("give either an explicit x or a phi rule, not both")

    kinds = tuple(k.strip() for k in data["kind"].split(",") if k.strip())
    if not kinds or any(k not in ("d", "f") for k in kinds):
        raise ValidationError("kind must be d, f, or d,f")
    primes = _expand_primes(data["primes"], data["prime_range"])
    x_window = int(data["x"]) if data["x"] else None
    if x_window is not None and x_window < 1:
        raise ValidationError("x must be >= 1")
    phi_c, phi_e = float(data["phi_c"]), float(data["phi_e"])
    if phi_c <= 0 or phi_e < 0:
        raise ValidationError("phi rule needs c > 0 and e >= 0")
    profile = data["profile"]
    w0 = float(data["w0"]) if data["w0"] else None
    w1 = float(data["w1"]) if data["w1"] else None
    if (w0 is None) != (w1 is None):
        raise ValidationError("custom weights need both w0 and w1")
    if w0 is not None and not (0 < w0 < w1):
        raise ValidationError("need 0 < w0 < w1")
    if w0 is None and profile not in PROFILES:
        raise ValidationError(f"unknown profile {profile!r}")
    gamma = tuple(int(v) for v in data["gamma"].split(","))
    if len(gamma) != 4:
        raise ValidationError("gamma must be a,b,c,d")
    if gamma[0] * gamma[3] - gamma[1] * gamma[2] == 0:
        raise ValidationError("gamma must be invertible")
    kappa_max = int(data["kappa_max"])
    lambda_max = int(data["lambda_max"])
    if kappa_max < 1 or lambda_max < 0:
        raise ValidationError("kappa_max >= 1 and lambda_max >= 0 required")
    workers = int(data["workers"])
    if workers < 1:
        raise ValidationError("workers must be >= 1")
    fmt = data["format"]
    if fmt not in ("csv", "json"):
        raise ValidationError("format must be csv or json")
    return ExperimentConfig(
        kinds=kinds,
        primes=primes,
        x_window=x_window,
        phi_c=phi_c,
        phi_e=phi_e,
        profile_name=profile,
        w0=w0,
        w1=w1,
        gamma=gamma,
        kappa_max=kappa_max,
        lambda_max=lambda_max,
        residues=int(data["residues"]),
        tuples=int(data["tuples"]),
        seed=int(data["seed"]),
        out=data["out"],
        workers=workers,
        fmt=fmt,
    )


def with_primes(cfg, primes):
    return replace(cfg, primes=tuple(primes))
