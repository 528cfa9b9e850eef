"""Gillespie direct-method trajectories, with and without time.

``run_ssa`` is the classical algorithm: each step draws an exponential
holding time with rate a0 and a reaction index proportional to the
propensities. ``run_timefree`` runs the identical state-transition loop but
skips the holding-time draws, recording the total propensity before every
firing instead; the elapsed time can then be reconstructed afterwards from
that log (see :mod:`exitsim.grouping`).

Both backends draw their reaction-selection uniforms from the stream's
selection substream, so with equal (seed, stream_id) they visit identical
state sequences.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import ExitCondition, ReactionSystem, SystemState, propensity
from .streams import RandomStream


class Status(Enum):
    EXITED = "exited"
    ABSORBED = "absorbed"
    STEP_LIMIT = "step_limit"


@dataclass
class TrajectoryOutcome:
    status: Status
    exit_time: float | None
    steps: int
    final_state: SystemState
    propensity_log: np.ndarray | None = None
    states: list[np.ndarray] | None = None


def _run(system: ReactionSystem, initial: SystemState, exit_cond: ExitCondition,
         stream: RandomStream, with_time: bool, record_states: bool):
    state = initial.copy()
    n_reactions = len(system.reactions)
    props = np.empty(n_reactions)
    log: list[float] = []
    states = [state.counts.copy()] if record_states else None
    t = initial.time
    steps = 0
    while True:
        if exit_cond.holds(state):
            status = Status.EXITED
            break
        if steps >= exit_cond.max_steps:
            status = Status.STEP_LIMIT
            break
        for i in range(n_reactions):
            props[i] = propensity(system, state, i)
        a0 = props.sum()
        if a0 <= 0.0:
            status = Status.ABSORBED
            break
        if with_time:
            t += stream.exponential(a0)
        else:
            log.append(a0)
        j = stream.discrete_index(props)
        state.counts += system.reactions[j].stoichiometry(system.n_species)
        steps += 1
        if record_states:
            states.append(state.counts.copy())
    state.time = t if with_time else initial.time
    return TrajectoryOutcome(
        status=status,
        exit_time=t if (with_time and status is Status.EXITED) else None,
        steps=steps,
        final_state=state,
        propensity_log=None if with_time else np.array(log),
        states=states,
    )


def run_ssa(system: ReactionSystem, initial: SystemState,
            exit_cond: ExitCondition, stream: RandomStream,
            record_states: bool = False) -> TrajectoryOutcome:
    """Classical SSA to the exit condition; exit_time set when it exits."""
    return _run(system, initial, exit_cond, stream, True, record_states)


def run_timefree(system: ReactionSystem, initial: SystemState,
                 exit_cond: ExitCondition, stream: RandomStream,
                 record_states: bool = False) -> TrajectoryOutcome:
    """State transitions only; records the pre-firing total propensities."""
    return _run(system, initial, exit_cond, stream, False, record_states)
