"""The outer VQE loop: SPSA over circuit angles interleaved with one
Newton-Raphson orbital step per macro-iteration, plus post-hoc constant
energy shifting of measured series.

Macro-iteration structure (orbital steps optional for plain pair-CCD runs):
optimize t at fixed orbitals, measure the RDMs at the optimum, take one
level-shifted Newton step on the orbital parameters, absorb it into the
integrals, reset kappa to zero, re-measure the energy, check convergence.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from .ansatz import build_upccd_circuit
from .estimator import (assemble_spinless_rdms, energy_from_rdms,
                        estimate_from_counts, exact_rdms, measurement_circuits)
from .integrals import build_seniority_zero, exp_antisymmetric, rotate_integrals
from .noise import NoiseModel, run_noisy
from .orbital_opt import (OrbitalOptConfig, min_hessian_eigenvalue,
                          orbital_gradient, orbital_hessian, step_candidates)
from .simulator import StateVector, rng_from_seed, run_circuit


@dataclass
class SpsaConfig:
    a: float = 0.1
    c: float = 0.1
    big_a: float = 10.0
    alpha: float = 0.602
    gamma: float = 0.101
    max_iter: int = 100


@dataclass
class VqeConfig:
    shots: int = 0                  # 0 = exact statevector expectations
    spsa: SpsaConfig = field(default_factory=SpsaConfig)
    macro_max: int = 30
    e_tol: float = None             # default 1e-6 exact, 1e-3 with shots
    seed: int = 0
    noise: NoiseModel = field(default_factory=NoiseModel.none)
    kappa_cap: float = 0.25
    level_shift: float = 1e-4
    orbital_optimize: bool = True
    exact_polish: bool = True       # deterministic local refinement after SPSA
    polish_maxiter: int = 300
    orbital_grad_tol: float = 1e-6
    redundancy_threshold: float = 0.07   # rad; converged-amplitude screen
    record_history: bool = False

    def resolved_e_tol(self):
        if self.e_tol is not None:
            return self.e_tol
        return 1e-6 if self.shots == 0 else 1e-3


@dataclass
class VqeResult:
    energies: list                  # (energy, stderr) per macro-iteration
    t_final: np.ndarray
    c_total: np.ndarray
    active_mask: np.ndarray
    shots_used: int
    converged: bool
    macro_iters: int
    t_history: list = field(default_factory=list)

    @property
    def final_energy(self):
        return self.energies[-1][0]

    @property
    def final_stderr(self):
        return self.energies[-1][1]


@dataclass
class SpsaResult:
    t: np.ndarray
    energy: float
    history: list
    n_evals: int


def spsa_minimize(objective, t0, cfg, rng):
    """Simultaneous-perturbation minimization; returns the best re-evaluated t.

    a_k = a / (k + 1 + A)^alpha, c_k = c / (k + 1)^gamma, Rademacher
    perturbations; each iteration costs three objective evaluations (the +/-
    pair and a re-evaluation of the new iterate for best-seen tracking).
    """
    t = np.array(t0, dtype=float)
    history = [t.copy()]
    n_evals = 1
    best_e, _ = objective(t)
    best_t = t.copy()
    if len(t) == 0:
        return SpsaResult(t=best_t, energy=best_e, history=history, n_evals=n_evals)
    for k in range(cfg.max_iter):
        ck = cfg.c / (k + 1) ** cfg.gamma
        ak = cfg.a / (k + 1 + cfg.big_a) ** cfg.alpha
        delta = rng.integers(0, 2, size=len(t)) * 2.0 - 1.0
        e_plus, _ = objective(t + ck * delta)
        e_minus, _ = objective(t - ck * delta)
        ghat = (e_plus - e_minus) / (2.0 * ck) * delta
        t = t - ak * ghat
        e_new, _ = objective(t)
        n_evals += 3
        history.append(t.copy())
        if e_new < best_e:
            best_e, best_t = e_new, t.copy()
    return SpsaResult(t=best_t, energy=best_e, history=history, n_evals=n_evals)


def _polish_minimize(objective, t0, maxiter):
    """Deterministic local refinement (L-BFGS with central-difference jac)."""
    t0 = np.array(t0, dtype=float)
    history = []
    if len(t0) == 0:
        e0, _ = objective(t0)
        return t0, e0, history

    def fun(v):
        return objective(v)[0]

    def jac(v):
        g = np.zeros(len(v))
        step = 1e-5
        for j in range(len(v)):
            e = np.zeros(len(v))
            e[j] = step
            g[j] = (fun(v + e) - fun(v - e)) / (2.0 * step)
        return g

    res = scipy.optimize.minimize(
        fun, t0, jac=jac, method="L-BFGS-B",
        callback=lambda v: history.append(np.array(v)),
        options={"maxiter": maxiter, "ftol": 1e-14, "gtol": 1e-10})
    e0 = fun(t0)
    if res.fun <= e0:
        return np.array(res.x), float(res.fun), history
    return t0, float(e0), history


class _EnergyEvaluator:
    """Three-basis energy/RDM evaluation, exact or shot-based."""

    def __init__(self, ansatz, cfg, rng_shots):
        self.ansatz = ansatz
        self.cfg = cfg
        self.rng = rng_shots
        self.shots_used = 0

    def _prepare(self, sys_cur):
        return build_seniority_zero(sys_cur)

    def rdms(self, hsz, t_full):
        circuit = build_upccd_circuit(self.ansatz, t=t_full)
        if self.cfg.shots == 0:
            state = run_circuit(StateVector.zero_state(circuit.n_qubits), circuit)
            rdmset = exact_rdms(state)
        else:
            cz, cx_, cy = measurement_circuits(circuit)
            shots = self.cfg.shots
            counts = [run_noisy(c, self.cfg.noise, shots, self.rng, basis=b)
                      for c, b in ((cz, "Z"), (cx_, "X"), (cy, "Y"))]
            self.shots_used += 3 * shots
            rdmset = estimate_from_counts(*counts)
        e, err = energy_from_rdms(rdmset, hsz)
        return rdmset, e, err

    def energy(self, hsz, t_full):
        _, e, err = self.rdms(hsz, t_full)
        return e, err


def run_vqe(sys, ansatz, cfg=None):
    """Macro-loop driver; returns energies per iteration and the final state.

    With shots == 0 every expectation is exact; an optional deterministic
    polish after each SPSA stage tightens the circuit parameters so that
    exact-mode runs converge to the variational minimum rather than to SPSA
    scatter (SPSA alone remains the shot-mode optimizer).
    """
    cfg = cfg or VqeConfig()
    rng_spsa = rng_from_seed(cfg.seed, 1)
    rng_shots = rng_from_seed(cfg.seed, 2)
    evaluator = _EnergyEvaluator(ansatz, cfg, rng_shots)
    exact = cfg.shots == 0
    e_tol = cfg.resolved_e_tol()

    sys_cur = sys
    c_total = np.eye(sys.n_orb)
    t_full = np.array(ansatz.t, dtype=float)
    mask = ansatz.active_mask
    energies = []
    t_history = [t_full.copy()] if cfg.record_history else []

    def expand(t_active):
        t = t_full.copy()
        t[mask] = t_active
        return t

    if cfg.macro_max == 0:
        hsz = build_seniority_zero(sys_cur)
        e, err = evaluator.energy(hsz, t_full)
        return VqeResult(energies=[(e, err)], t_final=t_full, c_total=c_total,
                         active_mask=mask.copy(), shots_used=evaluator.shots_used,
                         converged=False, macro_iters=0, t_history=t_history)

    hits = 0
    converged = False
    macro = 0
    spsa_cfg = cfg.spsa
    for macro in range(1, cfg.macro_max + 1):
        hsz = build_seniority_zero(sys_cur)

        def objective(t_active):
            return evaluator.energy(hsz, expand(t_active))

        stage_cfg = spsa_cfg
        if not exact:
            # widen the perturbation if shot noise would swamp it
            _, err0 = objective(t_full[mask])
            stage_cfg = replace(spsa_cfg, c=max(spsa_cfg.c, 2.0 * err0))
        res = spsa_minimize(objective, t_full[mask], stage_cfg, rng_spsa)
        t_act, e_t = res.t, res.energy
        if cfg.record_history:
            t_history.extend(expand(v) for v in res.history)
        if exact and cfg.exact_polish:
            t_act, e_t, hist = _polish_minimize(objective, t_act, cfg.polish_maxiter)
            if cfg.record_history:
                t_history.extend(expand(v) for v in hist)
        t_full = expand(t_act)

        rdmset, e_t, err_t = evaluator.rdms(hsz, t_full)
        e_macro, err_macro = e_t, err_t

        if cfg.orbital_optimize and sys.n_orb > 1:
            spin = assemble_spinless_rdms(rdmset)
            omega = orbital_gradient(spin, sys_cur)
            q_mat = orbital_hessian(spin, sys_cur)
            # a zero gradient with an indefinite Hessian is a saddle (e.g. the
            # symmetry-adapted point at stretched geometries); still step
            needs_step = (np.max(np.abs(omega)) > cfg.orbital_grad_tol
                          or min_hessian_eigenvalue(q_mat) < -cfg.orbital_grad_tol)
            if needs_step:
                cap = cfg.kappa_cap
                for _ in range(8):
                    oo_cfg = OrbitalOptConfig(level_shift=cfg.level_shift, kappa_cap=cap)
                    best = None
                    for kappa in step_candidates(omega, q_mat, oo_cfg):
                        c_step = exp_antisymmetric(kappa)
                        sys_try = rotate_integrals(sys_cur, c_step)
                        e_try, err_try = evaluator.energy(build_seniority_zero(sys_try),
                                                          t_full)
                        if best is None or e_try < best[0]:
                            best = (e_try, err_try, sys_try, c_step)
                    if (not exact) or best[0] <= e_t + 1e-12:
                        e_macro, err_macro, sys_cur, c_step = best
                        c_total = c_total @ c_step
                        break
                    cap *= 0.5

        energies.append((float(e_macro), float(err_macro)))
        if len(energies) >= 2:
            if abs(energies[-1][0] - energies[-2][0]) < e_tol:
                hits += 1
            else:
                hits = 0
            if hits >= 2:
                converged = True
                break

    return VqeResult(energies=energies, t_final=t_full, c_total=c_total,
                     active_mask=mask.copy(), shots_used=evaluator.shots_used,
                     converged=converged, macro_iters=macro, t_history=t_history)


def energy_shift(series, ref_geometry, ref_energy):
    """Shift every (geometry, energy) entry so the reference point matches.

    Adds the constant ref_energy - E(ref_geometry); relative energies are
    unchanged.
    """
    table = dict(series)
    if ref_geometry not in table:
        raise ValueError(f"reference geometry {ref_geometry!r} not in series")
    shift = ref_energy - table[ref_geometry]
    return [(g, e + shift) for g, e in series]
