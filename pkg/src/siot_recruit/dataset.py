"""Scenario generation and file I/O.

A scenario lives in a directory of four CSV files plus one flat key/value
config file:

    devices.csv   id,owner,x,y,is_public,skill_0..skill_{S-1},cost_0..cost_{S-1}
    tasks.csv     id,requester,x,y,radius,q_0..q_{S-1}
    owners.csv    owner_a,owner_b,weight
    contacts.csv  device_a,device_b,start_s,end_s
    scenario.toml n_skills, weight_*, distance_price, trust_threshold

The synthetic generator places devices uniformly on the unit square, wires
their owners into a Watts-Strogatz small world and emits a Poisson contact
log for spatially close device pairs.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .domain import (
    ConfigError,
    ContactEvent,
    Device,
    Location,
    ParseError,
    Scenario,
    Task,
    ValidationError,
)

DEVICES_FILE = "devices.csv"
TASKS_FILE = "tasks.csv"
OWNERS_FILE = "owners.csv"
CONTACTS_FILE = "contacts.csv"
CONFIG_FILE = "scenario.toml"

MAP_DIAGONAL = math.sqrt(2.0)

# Minimum contact duration emitted by the generator; keeps start < end after
# rounding to integer seconds.
_MIN_CONTACT_SECONDS = 60


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs for the synthetic generator.

    ``n_owners`` counts private owners only; public devices all share the
    single designated owner id ``n_owners`` which never appears in the
    owner social network.
    """

    n_devices: int = 2000
    private_fraction: float = 0.9
    n_owners: int | None = None
    n_skills: int = 5
    n_tasks: int = 20
    ws_k: int = 8
    ws_p: float = 0.5
    ws_variant: str = "rewire"  # "rewire" | "add"
    seed: int = 0
    task_radius_fraction: float = 0.15
    cost_range: tuple[float, float] = (1.0, 5.0)
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    distance_price: float = 2.0
    trust_threshold: float = 0.0
    contact_proximity: float = 0.05
    contact_rate: float = 3.0
    contact_mean_duration: float = 2700.0
    contact_horizon: int = 7 * 24 * 3600

    def __post_init__(self) -> None:
        if self.n_devices < 1:
            raise ConfigError("n_devices must be >= 1")
        if not (0.0 <= self.private_fraction <= 1.0):
            raise ConfigError("private_fraction must lie in [0, 1]")
        if self.n_skills < 1 or self.n_tasks < 1:
            raise ConfigError("n_skills and n_tasks must be >= 1")
        owners = self.resolved_owners()
        if owners < 1:
            raise ConfigError("n_owners must be >= 1")
        if self.ws_k % 2 != 0:
            raise ConfigError(f"ws_k must be even, got {self.ws_k}")
        if owners > 1 and self.ws_k >= owners:
            raise ConfigError(f"ws_k={self.ws_k} must be < n_owners={owners}")
        if not (0.0 <= self.ws_p <= 1.0):
            raise ConfigError("ws_p must lie in [0, 1]")
        if self.ws_variant not in ("rewire", "add"):
            raise ConfigError(f"unknown ws_variant {self.ws_variant!r}")
        if not (0.0 < self.task_radius_fraction <= 1.0):
            raise ConfigError("task_radius_fraction must lie in (0, 1]")
        lo, hi = self.cost_range
        if not (0.0 <= lo <= hi):
            raise ConfigError("cost_range must satisfy 0 <= lo <= hi")
        if self.contact_rate < 0.0 or self.contact_mean_duration <= 0.0:
            raise ConfigError("contact parameters must be non-negative")
        if self.contact_horizon <= _MIN_CONTACT_SECONDS:
            raise ConfigError("contact_horizon too short")

    def resolved_owners(self) -> int:
        if self.n_owners is not None:
            return self.n_owners
        n_private = round(self.n_devices * self.private_fraction)
        return max(1, n_private // 10)


# ---------------------------------------------------------------------------
# Watts-Strogatz owner network
# ---------------------------------------------------------------------------

def watts_strogatz(
    n: int,
    k: int,
    p: float,
    seed: int | np.random.Generator = 0,
    variant: str = "rewire",
) -> tuple[tuple[int, int, float], ...]:
    """Small-world graph over nodes 0..n-1, returned as sorted weight-1 edges.

    ``rewire`` is the classic model (each lattice edge rewired with
    probability p, edge count preserved at nk/2); ``add`` keeps the lattice
    and adds a random shortcut per lattice edge with probability p.
    """
    if k % 2 != 0:
        raise ConfigError(f"k must be even, got {k}")
    if n > 1 and k >= n:
        raise ConfigError(f"k={k} must be < n={n}")
    if not (0.0 <= p <= 1.0):
        raise ConfigError("p must lie in [0, 1]")
    if variant not in ("rewire", "add"):
        raise ConfigError(f"unknown variant {variant!r}")

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    edges: set[tuple[int, int]] = set()
    for j in range(1, k // 2 + 1):
        for i in range(n):
            u, v = i, (i + j) % n
            edges.add((min(u, v), max(u, v)))

    if variant == "rewire":
        # Rewire lattice edges ring by ring, keeping the far endpoint random.
        for j in range(1, k // 2 + 1):
            for i in range(n):
                if rng.random() >= p:
                    continue
                u, v = i, (i + j) % n
                old = (min(u, v), max(u, v))
                if old not in edges:
                    continue  # already rewired away by an earlier pass
                # Skip saturated nodes; a duplicate target would drop an edge.
                degree_u = sum(1 for e in edges if u in e)
                if degree_u >= n - 1:
                    continue
                while True:
                    w = int(rng.integers(n))
                    if w == u:
                        continue
                    new = (min(u, w), max(u, w))
                    if new not in edges:
                        edges.remove(old)
                        edges.add(new)
                        break
    else:
        # Newman-Watts: add one shortcut per lattice edge with probability p;
        # self-loops and duplicates are dropped, not retried.
        for j in range(1, k // 2 + 1):
            for i in range(n):
                if rng.random() >= p:
                    continue
                w = int(rng.integers(n))
                if w != i:
                    edges.add((min(i, w), max(i, w)))

    return tuple((u, v, 1.0) for u, v in sorted(edges))


# ---------------------------------------------------------------------------
# Synthetic scenario generation
# ---------------------------------------------------------------------------

def generate_scenario(cfg: ScenarioConfig) -> Scenario:
    """Deterministically build a Scenario from the config's seed."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_devices
    n_private = round(n * cfg.private_fraction)
    n_owners = cfg.resolved_owners()
    public_owner = n_owners

    xy = rng.random((n, 2))
    private_owners = rng.integers(0, n_owners, size=n_private)
    skills = rng.random((n, cfg.n_skills))
    lo, hi = cfg.cost_range
    costs = rng.uniform(lo, hi, size=(n, cfg.n_skills))

    devices = []
    for i in range(n):
        is_public = i >= n_private
        owner = public_owner if is_public else int(private_owners[i])
        devices.append(
            Device(
                id=i,
                owner=owner,
                location=Location(float(xy[i, 0]), float(xy[i, 1])),
                is_public=is_public,
                skill_level=tuple(float(v) for v in skills[i]),
                skill_cost=tuple(float(v) for v in costs[i]),
            )
        )

    owner_social = watts_strogatz(n_owners, cfg.ws_k, cfg.ws_p, rng, cfg.ws_variant)

    radius = cfg.task_radius_fraction * MAP_DIAGONAL
    tasks = []
    for t in range(cfg.n_tasks):
        required = _sample_required(rng, cfg.n_skills)
        tasks.append(
            Task(
                id=t,
                requester=int(rng.integers(n)),
                location=Location(float(rng.random()), float(rng.random())),
                required=required,
                radius=radius,
            )
        )

    contacts = _generate_contacts(rng, xy, cfg)

    return Scenario(
        devices=tuple(devices),
        tasks=tuple(tasks),
        owner_social=owner_social,
        contact_log=contacts,
        weights=cfg.weights,
        distance_price=cfg.distance_price,
        trust_threshold=cfg.trust_threshold,
        n_skills=cfg.n_skills,
    )


def _sample_required(rng: np.random.Generator, n_skills: int) -> tuple[int, ...]:
    while True:
        mask = tuple(int(b) for b in rng.integers(0, 2, size=n_skills))
        if any(mask):
            return mask


def _generate_contacts(
    rng: np.random.Generator, xy: np.ndarray, cfg: ScenarioConfig
) -> tuple[ContactEvent, ...]:
    if cfg.contact_rate == 0.0 or len(xy) < 2:
        return ()
    tree = cKDTree(xy)
    pairs = sorted(tree.query_pairs(cfg.contact_proximity))
    events: list[ContactEvent] = []
    horizon = cfg.contact_horizon
    for a, b in pairs:
        n_meet = int(rng.poisson(cfg.contact_rate))
        if n_meet == 0:
            continue
        starts = np.sort(rng.integers(0, horizon, size=n_meet))
        durations = rng.exponential(cfg.contact_mean_duration, size=n_meet)
        for s, d in zip(starts, durations):
            start = int(s)
            end = start + max(_MIN_CONTACT_SECONDS, int(d))
            events.append(ContactEvent(a=int(a), b=int(b), start=start, end=end))
    return tuple(events)


# ---------------------------------------------------------------------------
# Saving
# ---------------------------------------------------------------------------

def save_scenario(scenario: Scenario, path: str) -> None:
    """Write the scenario directory (created if missing)."""
    os.makedirs(path, exist_ok=True)
    s = scenario.n_skills

    with open(os.path.join(path, DEVICES_FILE), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["id", "owner", "x", "y", "is_public"]
            + [f"skill_{i}" for i in range(s)]
            + [f"cost_{i}" for i in range(s)]
        )
        for d in scenario.devices:
            writer.writerow(
                [d.id, d.owner, repr(d.location.x), repr(d.location.y), int(d.is_public)]
                + [repr(v) for v in d.skill_level]
                + [repr(v) for v in d.skill_cost]
            )

    with open(os.path.join(path, TASKS_FILE), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["id", "requester", "x", "y", "radius"] + [f"q_{i}" for i in range(s)]
        )
        for t in scenario.tasks:
            writer.writerow(
                [t.id, t.requester, repr(t.location.x), repr(t.location.y),
                 repr(t.radius)]
                + list(t.required)
            )

    with open(os.path.join(path, OWNERS_FILE), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["owner_a", "owner_b", "weight"])
        for a, b, w in scenario.owner_social:
            writer.writerow([a, b, repr(w)])

    with open(os.path.join(path, CONTACTS_FILE), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["device_a", "device_b", "start_s", "end_s"])
        for ev in scenario.contact_log:
            writer.writerow([ev.a, ev.b, ev.start, ev.end])

    pairs = [
        ("n_skills", scenario.n_skills),
        ("weight_skill", scenario.weights[0]),
        ("weight_cost", scenario.weights[1]),
        ("weight_trust", scenario.weights[2]),
        ("distance_price", scenario.distance_price),
        ("trust_threshold", scenario.trust_threshold),
    ]
    with open(os.path.join(path, CONFIG_FILE), "w") as fh:
        for key, value in pairs:
            fh.write(f"{key} = {value!r}\n")


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {
    "n_skills": int,
    "weight_skill": float,
    "weight_cost": float,
    "weight_trust": float,
    "distance_price": float,
    "trust_threshold": float,
}

_GENERATOR_KEYS = {
    "n_devices": int,
    "private_fraction": float,
    "n_owners": int,
    "n_skills": int,
    "n_tasks": int,
    "ws_k": int,
    "ws_p": float,
    "ws_variant": str,
    "seed": int,
    "task_radius_fraction": float,
    "cost_lo": float,
    "cost_hi": float,
    "weight_skill": float,
    "weight_cost": float,
    "weight_trust": float,
    "distance_price": float,
    "trust_threshold": float,
    "contact_proximity": float,
    "contact_rate": float,
    "contact_mean_duration": float,
    "contact_horizon": int,
}


def scenario_config_from_file(path: str) -> ScenarioConfig:
    """Build a ScenarioConfig from a flat ``key = value`` file; every key is
    optional and unknown keys are rejected."""
    raw: dict = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ParseError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = text.partition("=")
            key, value = key.strip(), value.strip().strip("\"'")
            if key not in _GENERATOR_KEYS:
                raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                raw[key] = _GENERATOR_KEYS[key](value)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad value for {key!r}") from exc

    kwargs: dict = {}
    weights = [raw.pop("weight_skill", None), raw.pop("weight_cost", None),
               raw.pop("weight_trust", None)]
    if any(w is not None for w in weights):
        if any(w is None for w in weights):
            raise ParseError(f"{path}: all three weight_* keys must be given together")
        kwargs["weights"] = tuple(weights)
    lo, hi = raw.pop("cost_lo", None), raw.pop("cost_hi", None)
    if lo is not None or hi is not None:
        if lo is None or hi is None:
            raise ParseError(f"{path}: cost_lo and cost_hi must be given together")
        kwargs["cost_range"] = (lo, hi)
    kwargs.update(raw)
    return ScenarioConfig(**kwargs)


def _read_config(path: str) -> dict:
    """Flat ``key = value`` reader for scenario.toml (ints and floats only)."""
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected 'key = value'")
            key, _, text = line.partition("=")
            key = key.strip()
            text = text.strip()
            if key not in _CONFIG_KEYS:
                raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ParseError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                values[key] = _CONFIG_KEYS[key](text)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad value for {key!r}: {text!r}") from exc
    missing = set(_CONFIG_KEYS) - set(values)
    if missing:
        raise ParseError(f"{path}: missing keys {sorted(missing)}")
    return values


def _read_rows(path: str, expected_header: list[str]) -> list[tuple[int, list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}:1: empty file") from None
        if header != expected_header:
            raise ParseError(
                f"{path}:1: header mismatch, expected {expected_header}, got {header}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise ParseError(
                    f"{path}:{lineno}: expected {len(expected_header)} fields, got {len(row)}"
                )
            rows.append((lineno, row))
    return rows


def _parse(path: str, lineno: int, kind, text: str):
    try:
        return kind(text)
    except ValueError as exc:
        raise ParseError(f"{path}:{lineno}: bad {kind.__name__} {text!r}") from exc


def load_scenario(path: str) -> Scenario:
    """Load and validate a scenario directory.

    Coordinates outside the unit square (raw map data) are min-max
    normalized with a single uniform scale across both axes so that
    distances and radii stay geometrically consistent.
    """
    cfg = _read_config(os.path.join(path, CONFIG_FILE))
    s = cfg["n_skills"]

    dev_path = os.path.join(path, DEVICES_FILE)
    dev_header = (
        ["id", "owner", "x", "y", "is_public"]
        + [f"skill_{i}" for i in range(s)]
        + [f"cost_{i}" for i in range(s)]
    )
    raw_devices = []
    for lineno, row in _read_rows(dev_path, dev_header):
        pub = _parse(dev_path, lineno, int, row[4])
        if pub not in (0, 1):
            raise ParseError(f"{dev_path}:{lineno}: is_public must be 0 or 1")
        raw_devices.append(
            dict(
                id=_parse(dev_path, lineno, int, row[0]),
                owner=_parse(dev_path, lineno, int, row[1]),
                x=_parse(dev_path, lineno, float, row[2]),
                y=_parse(dev_path, lineno, float, row[3]),
                is_public=bool(pub),
                skill_level=tuple(_parse(dev_path, lineno, float, v) for v in row[5 : 5 + s]),
                skill_cost=tuple(_parse(dev_path, lineno, float, v) for v in row[5 + s :]),
            )
        )

    task_path = os.path.join(path, TASKS_FILE)
    task_header = ["id", "requester", "x", "y", "radius"] + [f"q_{i}" for i in range(s)]
    raw_tasks = []
    for lineno, row in _read_rows(task_path, task_header):
        raw_tasks.append(
            dict(
                id=_parse(task_path, lineno, int, row[0]),
                requester=_parse(task_path, lineno, int, row[1]),
                x=_parse(task_path, lineno, float, row[2]),
                y=_parse(task_path, lineno, float, row[3]),
                radius=_parse(task_path, lineno, float, row[4]),
                required=tuple(_parse(task_path, lineno, int, v) for v in row[5:]),
            )
        )

    own_path = os.path.join(path, OWNERS_FILE)
    owner_edges = []
    for lineno, row in _read_rows(own_path, ["owner_a", "owner_b", "weight"]):
        owner_edges.append(
            (
                _parse(own_path, lineno, int, row[0]),
                _parse(own_path, lineno, int, row[1]),
                _parse(own_path, lineno, float, row[2]),
            )
        )

    con_path = os.path.join(path, CONTACTS_FILE)
    contacts = []
    for lineno, row in _read_rows(con_path, ["device_a", "device_b", "start_s", "end_s"]):
        try:
            contacts.append(
                ContactEvent(
                    a=_parse(con_path, lineno, int, row[0]),
                    b=_parse(con_path, lineno, int, row[1]),
                    start=_parse(con_path, lineno, int, row[2]),
                    end=_parse(con_path, lineno, int, row[3]),
                )
            )
        except ValidationError as exc:
            raise ValidationError(f"{con_path}:{lineno}: {exc}") from exc

    # Normalize raw coordinates if anything falls outside the unit square.
    xs = [d["x"] for d in raw_devices] + [t["x"] for t in raw_tasks]
    ys = [d["y"] for d in raw_devices] + [t["y"] for t in raw_tasks]
    scale, x0, y0 = 1.0, 0.0, 0.0
    if xs and (
        min(xs) < 0.0 or max(xs) > 1.0 or min(ys) < 0.0 or max(ys) > 1.0
    ):
        x0, y0 = min(xs), min(ys)
        extent = max(max(xs) - x0, max(ys) - y0)
        scale = 1.0 / extent if extent > 0.0 else 1.0

    devices = tuple(
        Device(
            id=d["id"],
            owner=d["owner"],
            location=Location((d["x"] - x0) * scale, (d["y"] - y0) * scale),
            is_public=d["is_public"],
            skill_level=d["skill_level"],
            skill_cost=d["skill_cost"],
        )
        for d in raw_devices
    )
    tasks = tuple(
        Task(
            id=t["id"],
            requester=t["requester"],
            location=Location((t["x"] - x0) * scale, (t["y"] - y0) * scale),
            required=t["required"],
            radius=t["radius"] * scale,
        )
        for t in raw_tasks
    )

    return Scenario(
        devices=devices,
        tasks=tasks,
        owner_social=tuple(owner_edges),
        contact_log=tuple(contacts),
        weights=(cfg["weight_skill"], cfg["weight_cost"], cfg["weight_trust"]),
        distance_price=cfg["distance_price"],
        trust_threshold=cfg["trust_threshold"],
        n_skills=s,
    )
