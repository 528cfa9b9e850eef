"""Numba-compiled batch kernels for ensemble runs.

The single-trajectory functions in :mod:`exitsim.ssa` are the readable
reference; these kernels run the same loops over whole batches of
trajectories so that ensembles of millions of trajectories finish in
seconds. Propensities are recomputed in full every step.

A reaction system is flattened into arrays once per run: ``rate_eff[r]`` is
k * Omega^(1 - total order) so the propensity is rate_eff times the falling
factorials of the reactant counts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import ExitCondition, ReactionSystem, SystemState


@dataclass(frozen=True)
class CompiledSystem:
    rate_eff: np.ndarray    # per reaction
    sp_idx: np.ndarray      # flattened reactant species indices
    sp_order: np.ndarray    # flattened reactant orders
    sp_off: np.ndarray      # reactant slice offsets per reaction, len n_r + 1
    stoich: np.ndarray      # (n_reactions, n_species)


def compile_system(system: ReactionSystem) -> CompiledSystem:
    rate_eff = np.empty(len(system.reactions))
    sp_idx: list[int] = []
    sp_order: list[int] = []
    sp_off = [0]
    for r, reaction in enumerate(system.reactions):
        total_order = sum(reaction.reactants.values())
        rate_eff[r] = reaction.rate * float(system.omega) ** (1 - total_order)
        for sp, order in sorted(reaction.reactants.items()):
            if order > 0:
                sp_idx.append(sp)
                sp_order.append(order)
        sp_off.append(len(sp_idx))
    return CompiledSystem(
        rate_eff=rate_eff,
        sp_idx=np.array(sp_idx, dtype=np.int64),
        sp_order=np.array(sp_order, dtype=np.int64),
        sp_off=np.array(sp_off, dtype=np.int64),
        stoich=system.stoichiometry_matrix(),
    )


@njit(cache=True)
def _ssa_batch(rate_eff, sp_idx, sp_order, sp_off, stoich, x0,
               exit_sp, exit_op, exit_val, max_steps, n_traj,
               gen_sel, gen_time):
    n_r = rate_eff.shape[0]
    n_s = stoich.shape[1]
    props = np.empty(n_r)
    times = np.empty(n_traj)
    x = np.empty(n_s, dtype=np.int64)
    n_ex = 0
    n_cens = 0
    total_steps = 0
    exited_steps = 0
    for _ in range(n_traj):
        for j in range(n_s):
            x[j] = x0[j]
        t = 0.0
        steps = 0
        status = 2
        while True:
            v = x[exit_sp]
            if ((exit_op == 0 and v >= exit_val)
                    or (exit_op == 1 and v <= exit_val)
                    or (exit_op == 2 and v == exit_val)):
                status = 0
                break
            if steps >= max_steps:
                break
            a0 = 0.0
            for r in range(n_r):
                a = rate_eff[r]
                for q in range(sp_off[r], sp_off[r + 1]):
                    xv = x[sp_idx[q]]
                    if xv < sp_order[q]:
                        a = 0.0
                        break
                    for o in range(sp_order[q]):
                        a *= (xv - o)
                props[r] = a
                a0 += a
            if a0 <= 0.0:
                status = 1
                break
            t += -np.log1p(-gen_time.random()) / a0
            target = gen_sel.random() * a0
            acc = 0.0
            sel = n_r - 1
            for r in range(n_r):
                acc += props[r]
                if target <= acc:
                    sel = r
                    break
            for j in range(n_s):
                x[j] += stoich[sel, j]
            steps += 1
        total_steps += steps
        if status == 0:
            times[n_ex] = t
            exited_steps += steps
            n_ex += 1
        else:
            n_cens += 1
    return times[:n_ex].copy(), n_cens, total_steps, exited_steps


@njit(cache=True)
def _timefree_batch(rate_eff, sp_idx, sp_order, sp_off, stoich, x0,
                    exit_sp, exit_op, exit_val, max_steps, n_traj, gen_sel):
    n_r = rate_eff.shape[0]
    n_s = stoich.shape[1]
    props = np.empty(n_r)
    logbuf = np.empty(max_steps)
    logs = np.empty(4096)
    log_off_list = np.empty(n_traj + 1, dtype=np.int64)
    log_off_list[0] = 0
    x = np.empty(n_s, dtype=np.int64)
    n_ex = 0
    n_zero = 0
    n_cens = 0
    total_steps = 0
    exited_steps = 0
    for _ in range(n_traj):
        for j in range(n_s):
            x[j] = x0[j]
        steps = 0
        status = 2
        while True:
            v = x[exit_sp]
            if ((exit_op == 0 and v >= exit_val)
                    or (exit_op == 1 and v <= exit_val)
                    or (exit_op == 2 and v == exit_val)):
                status = 0
                break
            if steps >= max_steps:
                break
            a0 = 0.0
            for r in range(n_r):
                a = rate_eff[r]
                for q in range(sp_off[r], sp_off[r + 1]):
                    xv = x[sp_idx[q]]
                    if xv < sp_order[q]:
                        a = 0.0
                        break
                    for o in range(sp_order[q]):
                        a *= (xv - o)
                props[r] = a
                a0 += a
            if a0 <= 0.0:
                status = 1
                break
            logbuf[steps] = a0
            target = gen_sel.random() * a0
            acc = 0.0
            sel = n_r - 1
            for r in range(n_r):
                acc += props[r]
                if target <= acc:
                    sel = r
                    break
            for j in range(n_s):
                x[j] += stoich[sel, j]
            steps += 1
        total_steps += steps
        if status == 0:
            if steps == 0:
                n_zero += 1
            else:
                off = log_off_list[n_ex]
                while off + steps > logs.shape[0]:
                    bigger = np.empty(logs.shape[0] * 2)
                    bigger[:off] = logs[:off]
                    logs = bigger
                for q in range(steps):
                    logs[off + q] = logbuf[q]
                log_off_list[n_ex + 1] = off + steps
                exited_steps += steps
                n_ex += 1
        else:
            n_cens += 1
    return (logs[:log_off_list[n_ex]].copy(), log_off_list[:n_ex + 1].copy(),
            n_zero, n_cens, total_steps, exited_steps)


@njit(cache=True)
def _partition_flat(logs, offs, eps):
    """Group every trajectory's log; groups are prefixes of the descending
    sort with relative tolerance eps. Returns the sort permutation (global
    indices into logs), flat group offsets into the permuted order, the
    harmonic-mean rate per group, and the group count per trajectory."""
    n_traj = offs.shape[0] - 1
    n_total = logs.shape[0]
    perm = np.empty(n_total, dtype=np.int64)
    group_off = np.empty(n_total + 1, dtype=np.int64)
    lam_tilde = np.empty(n_total)
    m_per = np.empty(n_traj, dtype=np.int64)
    g = 0
    group_off[0] = 0
    for tr in range(n_traj):
        lo, hi = offs[tr], offs[tr + 1]
        lam = logs[lo:hi]
        order = np.argsort(lam)[::-1]
        for q in range(hi - lo):
            perm[lo + q] = lo + order[q]
        n = hi - lo
        i = 0
        m = 0
        while i < n:
            lead = lam[order[i]]
            cutoff = lead * (1.0 - eps)
            inv_sum = 1.0 / lead
            j = i + 1
            while j < n and lam[order[j]] >= cutoff:
                inv_sum += 1.0 / lam[order[j]]
                j += 1
            lam_tilde[g] = (j - i) / inv_sum
            group_off[g + 1] = lo + j
            g += 1
            m += 1
            i = j
        m_per[tr] = m
    return perm, group_off[:g + 1].copy(), lam_tilde[:g].copy(), m_per


def run_ssa_batch(cs: CompiledSystem, initial: SystemState,
                  exit_cond: ExitCondition, n_traj: int, gen_sel, gen_time):
    return _ssa_batch(cs.rate_eff, cs.sp_idx, cs.sp_order, cs.sp_off, cs.stoich,
                      initial.counts, exit_cond.species, exit_cond.op_code,
                      exit_cond.threshold, exit_cond.max_steps, n_traj,
                      gen_sel, gen_time)


def run_timefree_batch(cs: CompiledSystem, initial: SystemState,
                       exit_cond: ExitCondition, n_traj: int, gen_sel):
    return _timefree_batch(cs.rate_eff, cs.sp_idx, cs.sp_order, cs.sp_off,
                           cs.stoich, initial.counts, exit_cond.species,
                           exit_cond.op_code, exit_cond.threshold,
                           exit_cond.max_steps, n_traj, gen_sel)


def partition_flat(logs: np.ndarray, offs: np.ndarray, eps: float):
    return _partition_flat(logs, offs, eps)
