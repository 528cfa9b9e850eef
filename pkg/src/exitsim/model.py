"""Reaction systems: species, reactions, states, and propensity evaluation."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class ModelError(ValueError):
    """Raised when a model definition is malformed or inconsistent."""


@dataclass(frozen=True)
class Species:
    id: int
    name: str


@dataclass(frozen=True)
class Reaction:
    """A single reaction channel.

    ``reactants`` maps species index -> reaction order (number of copies
    consumed), ``products`` maps species index -> number produced. The
    stoichiometric change vector is products - reactants.
    """
    rate: float
    reactants: dict[int, int]
    products: dict[int, int]

    def __post_init__(self):
        if self.rate < 0:
            raise ModelError(f"reaction rate must be >= 0, got {self.rate}")
        for d in (self.reactants, self.products):
            for sp, n in d.items():
                if n < 0:
                    raise ModelError(f"negative stoichiometry for species {sp}")

    def stoichiometry(self, n_species: int) -> np.ndarray:
        nu = np.zeros(n_species, dtype=np.int64)
        for sp, n in self.products.items():
            nu[sp] += n
        for sp, n in self.reactants.items():
            nu[sp] -= n
        return nu


@dataclass(frozen=True)
class ReactionSystem:
    species: tuple[Species, ...]
    reactions: tuple[Reaction, ...]
    omega: int

    def __post_init__(self):
        if self.omega < 1:
            raise ModelError(f"omega must be >= 1, got {self.omega}")
        ids = [s.id for s in self.species]
        if ids != list(range(len(self.species))):
            raise ModelError("species ids must be dense 0..d-1")
        names = [s.name for s in self.species]
        if len(set(names)) != len(names):
            raise ModelError("species names must be unique")
        d = len(self.species)
        for r in self.reactions:
            for sp in list(r.reactants) + list(r.products):
                if not 0 <= sp < d:
                    raise ModelError(f"reaction references unknown species {sp}")

    @property
    def n_species(self) -> int:
        return len(self.species)

    def species_index(self, name: str) -> int:
        for s in self.species:
            if s.name == name:
                return s.id
        raise ModelError(f"unknown species {name!r}")

    def stoichiometry_matrix(self) -> np.ndarray:
        return np.array([r.stoichiometry(self.n_species) for r in self.reactions],
                        dtype=np.int64)


@dataclass
class SystemState:
    counts: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if (self.counts < 0).any():
            raise ModelError(f"negative copy numbers: {self.counts}")
        if self.time < 0:
            raise ModelError("time must be nonnegative")

    def copy(self) -> "SystemState":
        return SystemState(self.counts.copy(), self.time)


_COMPARATORS = {">=": 0, "<=": 1, "==": 2}


@dataclass(frozen=True)
class ExitCondition:
    """Stop a trajectory once a species count crosses a threshold."""
    species: int
    comparator: str
    threshold: int
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.comparator not in _COMPARATORS:
            raise ModelError(f"comparator must be one of {sorted(_COMPARATORS)}")
        if self.threshold < 0:
            raise ModelError("threshold must be nonnegative")
        if self.max_steps < 1:
            raise ModelError("max_steps must be >= 1")

    @property
    def op_code(self) -> int:
        return _COMPARATORS[self.comparator]

    def holds(self, state: SystemState) -> bool:
        v = int(state.counts[self.species])
        if self.comparator == ">=":
            return v >= self.threshold
        if self.comparator == "<=":
            return v <= self.threshold
        return v == self.threshold


def propensity(system: ReactionSystem, state: SystemState, i: int) -> float:
    """Rate of reaction ``i`` in the given state.

    k * Omega * prod_j [ X_j (X_j - 1) ... (X_j - r_j + 1) / Omega^r_j ];
    zero whenever some reactant has fewer copies than its order.
    """
    r = system.reactions[i]
    a = r.rate * system.omega
    for sp, order in r.reactants.items():
        x = int(state.counts[sp])
        if x < order:
            return 0.0
        for q in range(order):
            a *= (x - q)
        a /= float(system.omega) ** order
    return a


def total_propensity(system: ReactionSystem, state: SystemState) -> float:
    return sum(propensity(system, state, i) for i in range(len(system.reactions)))


def apply_reaction(state: SystemState, system: ReactionSystem, i: int) -> SystemState:
    """Fire reaction ``i`` once; time is advanced separately by the caller."""
    nu = system.reactions[i].stoichiometry(system.n_species)
    counts = state.counts + nu
    if (counts < 0).any():
        raise ModelError(
            f"firing reaction {i} would drive a count negative: {counts}")
    return SystemState(counts, state.time)


_TOP_FIELDS = {"species", "omega", "reactions", "initial", "exit"}
_REACTION_FIELDS = {"rate", "reactants", "products"}
_EXIT_FIELDS = {"species", "op", "value"}


def parse_model(doc: dict) -> tuple[ReactionSystem, SystemState, ExitCondition]:
    """Validate a model document and build the system, initial state and exit."""
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    unknown = set(doc) - _TOP_FIELDS
    if unknown:
        raise ModelError(f"unknown model fields: {sorted(unknown)}")
    for f in _TOP_FIELDS:
        if f not in doc:
            raise ModelError(f"missing model field: {f!r}")

    names = doc["species"]
    if (not isinstance(names, list) or not names
            or not all(isinstance(n, str) for n in names)):
        raise ModelError("'species' must be a nonempty array of names")
    species = tuple(Species(i, n) for i, n in enumerate(names))
    index = {n: i for i, n in enumerate(names)}
    if len(index) != len(names):
        raise ModelError("duplicate species names")

    omega = doc["omega"]
    if not isinstance(omega, int) or omega < 1:
        raise ModelError("'omega' must be a positive integer")

    def count_map(m, what):
        if not isinstance(m, dict):
            raise ModelError(f"{what} must be an object of species: count")
        out = {}
        for name, n in m.items():
            if name not in index:
                raise ModelError(f"{what} references unknown species {name!r}")
            if not isinstance(n, int) or n < 0:
                raise ModelError(f"{what}[{name!r}] must be a nonnegative integer")
            out[index[name]] = n
        return out

    reactions = []
    for k, rd in enumerate(doc["reactions"]):
        if not isinstance(rd, dict):
            raise ModelError(f"reactions[{k}] must be an object")
        unknown = set(rd) - _REACTION_FIELDS
        if unknown:
            raise ModelError(f"reactions[{k}] has unknown fields: {sorted(unknown)}")
        if "rate" not in rd or not isinstance(rd["rate"], (int, float)) or rd["rate"] < 0:
            raise ModelError(f"reactions[{k}].rate must be a nonnegative number")
        reactions.append(Reaction(
            rate=float(rd["rate"]),
            reactants=count_map(rd.get("reactants", {}), f"reactions[{k}].reactants"),
            products=count_map(rd.get("products", {}), f"reactions[{k}].products"),
        ))
    if not reactions:
        raise ModelError("'reactions' must be a nonempty array")
    system = ReactionSystem(species, tuple(reactions), omega)

    init = count_map(doc["initial"], "initial")
    counts = np.zeros(len(names), dtype=np.int64)
    for sp, n in init.items():
        counts[sp] = n
    initial = SystemState(counts)

    ex = doc["exit"]
    if not isinstance(ex, dict):
        raise ModelError("'exit' must be an object")
    unknown = set(ex) - _EXIT_FIELDS
    if unknown:
        raise ModelError(f"exit has unknown fields: {sorted(unknown)}")
    if ex.get("species") not in index:
        raise ModelError(f"exit.species {ex.get('species')!r} is not a species")
    if ex.get("op") not in _COMPARATORS:
        raise ModelError("exit.op must be one of '>=', '<=', '=='")
    if not isinstance(ex.get("value"), int) or ex["value"] < 0:
        raise ModelError("exit.value must be a nonnegative integer")
    exit_cond = ExitCondition(index[ex["species"]], ex["op"], ex["value"])

    return system, initial, exit_cond


def load_model(path) -> tuple[ReactionSystem, SystemState, ExitCondition]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ModelError(f"invalid JSON in {path}: {e}") from e
    return parse_model(doc)
