"""Reconstruction engines: Error Reduction, sequential ptychographic
sweeps with gradient-descent / Fourier-mix / object-mix update rules, the
20-scheme benchmark registry, and the intensity-constraint adaptation loop.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cost import (Transform, TRANSFORMS, functional_by_name,
                   gradient_residual)
from .forward import Dataset, Mode, exit_wave, simulate_dataset
from .grids import crop_center, dft2, idft2, zero_pad_center


def modulus_substitute(G: np.ndarray, target_amplitude: np.ndarray) -> np.ndarray:
    """Replace |G| with the target amplitude while keeping the phase of G.

    Where |G| = 0 the phase factor is defined as 1, so runs stay
    reproducible.
    """
    if G.shape != target_amplitude.shape:
        raise ValueError("shape mismatch in modulus substitution")
    if np.any(target_amplitude < 0):
        raise ValueError("target amplitude must be nonnegative")
    mod = np.abs(G)
    phase = np.where(mod > 0, G / np.where(mod > 0, mod, 1.0), 1.0)
    return target_amplitude * phase


def er_support_iterate(g: np.ndarray, support_mask: np.ndarray,
                       measured_amplitude: np.ndarray) -> np.ndarray:
    """One Error Reduction iterate for single-measurement phase retrieval:
    enforce the Fourier modulus, then zero the field outside the support."""
    g_sub = idft2(modulus_substitute(dft2(g), measured_amplitude))
    return np.where(support_mask, g_sub, 0.0)


# ---------------------------------------------------------------------------
# update rule variants

@dataclass(frozen=True)
class GradientDescent:
    """Steepest descent on a cost functional via its Wirtinger gradient."""
    functional: object  # VST or PoissonLogLikelihood


@dataclass(frozen=True)
class FourierMix:
    """Convex combination of transformed intensities in the Fourier domain,
    keeping the estimated phase."""
    transform: Transform


@dataclass(frozen=True)
class ObjectMix:
    """Full modulus-substitution update followed by a transformed convex
    combination of old and new object in the object domain."""
    transform: Transform


@dataclass
class ReconstructionState:
    object_estimate: np.ndarray
    iteration: int = 0
    error_log: list = field(default_factory=list)
    rng: np.random.Generator = field(
        default_factory=lambda: np.random.default_rng(0))

    @classmethod
    def constant_init(cls, object_dims, value=1.0 + 0.0j, seed=0):
        return cls(object_estimate=np.full(object_dims, value, dtype=complex),
                   rng=np.random.default_rng(seed))


def _substituted_exit(G, y, eps_amp=0.0):
    """g' of the modulus-substitution step: IDFT of G with amplitude sqrt(y)."""
    return idft2(modulus_substitute(G, np.sqrt(y)))


def _phasor_mix(phase_a, phase_b, mu):
    """Normalized convex combination of two unit phasors."""
    mix = (1.0 - mu) * phase_a + mu * phase_b
    mod = np.abs(mix)
    return np.where(mod > 0, mix / np.where(mod > 0, mod, 1.0), 1.0)


def _unit_phase(v):
    mod = np.abs(v)
    return np.where(mod > 0, v / np.where(mod > 0, mod, 1.0), 1.0)


def _apply_rule_at_position(obj, probe, pos, pattern, rule, mu, oversampling):
    """Update `obj` in place at one probe position. Returns nothing."""
    if isinstance(rule, (FourierMix, ObjectMix)) and mu == 0.0:
        return  # exact convex endpoint: no update
    wh, ww = probe.shape
    r, c = pos
    g = exit_wave(obj, probe, pos)
    G = dft2(zero_pad_center(g, oversampling))
    window = obj[r:r + wh, c:c + ww]

    if isinstance(rule, GradientDescent):
        R = gradient_residual(rule.functional, G, pattern)
        d = crop_center(idft2(R), wh, ww)
        window -= mu * np.conj(probe) * d
        return

    if isinstance(rule, FourierMix):
        t = rule.transform
        z = np.abs(G) ** 2
        mixed = t.inv((1.0 - mu) * t.fwd(z) + mu * t.fwd(pattern))
        G_new = np.sqrt(np.maximum(mixed, 0.0)) * _unit_phase(G)
        g_new = crop_center(idft2(G_new), wh, ww)
        window += np.conj(probe) * (g_new - g)
        return

    if isinstance(rule, ObjectMix):
        t = rule.transform
        g_prime = crop_center(_substituted_exit(G, pattern), wh, ww)
        window_prime = window + np.conj(probe) * (g_prime - g)
        mod = t.inv((1.0 - mu) * t.fwd(np.abs(window))
                    + mu * t.fwd(np.abs(window_prime)))
        phase = _phasor_mix(_unit_phase(window), _unit_phase(window_prime), mu)
        window[:] = np.maximum(mod, 0.0) * phase
        return

    raise ValueError(f"unknown rule variant {rule!r}")


def position_sweep(state: ReconstructionState, dataset: Dataset,
                   rule, mu: float,
                   patterns: Optional[np.ndarray] = None) -> ReconstructionState:
    """One full sweep of sequential per-position updates, in shuffled order
    drawn from the state's stream. Mutates and returns `state`.

    `patterns` overrides the dataset's measured stack (used by the
    intensity-constraint adapter).
    """
    y = dataset.patterns if patterns is None else patterns
    order = state.rng.permutation(len(dataset.geometry.positions))
    for j in order:
        _apply_rule_at_position(state.object_estimate, dataset.probe,
                                dataset.geometry.positions[j], y[j],
                                rule, mu, dataset.oversampling)
    state.iteration += 1
    return state


def global_gradient_step(state: ReconstructionState, dataset: Dataset,
                         functional, mu: float) -> ReconstructionState:
    """One simultaneous update accumulating all positions' gradient
    contributions before touching the object."""
    obj = state.object_estimate
    probe = dataset.probe
    wh, ww = probe.shape
    accum = np.zeros_like(obj)
    for pos, pattern in zip(dataset.geometry.positions, dataset.patterns):
        g = exit_wave(obj, probe, pos)
        G = dft2(zero_pad_center(g, dataset.oversampling))
        R = gradient_residual(functional, G, pattern)
        d = crop_center(idft2(R), wh, ww)
        r, c = pos
        accum[r:r + wh, c:c + ww] += np.conj(probe) * d
    state.object_estimate = obj - mu * accum
    state.iteration += 1
    return state


# ---------------------------------------------------------------------------
# scheme registry

@dataclass(frozen=True)
class SchemeSpec:
    id: int
    refinement_rule: object
    mu: float
    warmup_iterations: int = 100
    refinement_iterations: int = 200

    def describe(self):
        rule = self.refinement_rule
        if isinstance(rule, GradientDescent):
            return ("gradient_descent", rule.functional.name)
        if isinstance(rule, FourierMix):
            return ("fourier_mix", rule.transform.name)
        return ("object_mix", rule.transform.name)


_AMPLITUDE = functional_by_name("sqrt")
WARMUP_RULE = GradientDescent(_AMPLITUDE)

_GD_FUNCTIONALS = ["sqrt", "pow_0.7", "pow_0.9", "anscombe", "sqrt_plus_1",
                   "log_half", "log_1"]
_MIX_TRANSFORMS = ["anscombe", "sqrt_plus_1", "pow_0.7", "identity",
                   "log_half", "log_1"]


def _build_schemes():
    schemes = {}
    # scheme 1: Error Reduction throughout (amplitude cost, mu = 1)
    schemes[1] = SchemeSpec(1, GradientDescent(_AMPLITUDE), 1.0)
    for i, name in enumerate(_GD_FUNCTIONALS, start=2):
        schemes[i] = SchemeSpec(i, GradientDescent(functional_by_name(name)), 0.1)
    for i, name in enumerate(_MIX_TRANSFORMS, start=9):
        schemes[i] = SchemeSpec(i, FourierMix(TRANSFORMS[name]), 0.1)
    for i, name in enumerate(_MIX_TRANSFORMS, start=15):
        schemes[i] = SchemeSpec(i, ObjectMix(TRANSFORMS[name]), 0.1)
    return schemes


SCHEMES = _build_schemes()


def scheme(scheme_id: int, warmup_iterations: int = 100,
           refinement_iterations: int = 200) -> SchemeSpec:
    """Look up a benchmark scheme by its stable id (1..20), optionally
    overriding the iteration counts."""
    if scheme_id not in SCHEMES:
        raise ValueError(f"unknown scheme id {scheme_id}; valid ids are 1..20")
    base = SCHEMES[scheme_id]
    return SchemeSpec(base.id, base.refinement_rule, base.mu,
                      warmup_iterations, refinement_iterations)


def run_scheme(spec: SchemeSpec, dataset: Dataset,
               init_object: Optional[np.ndarray] = None,
               true_object: Optional[np.ndarray] = None,
               mask: Optional[np.ndarray] = None,
               seed: int = 0) -> ReconstructionState:
    """Run one benchmark scheme: warmup sweeps of Error Reduction
    (amplitude cost, mu = 1), then refinement sweeps with the scheme's rule.

    Logs the masked reconstruction error once per sweep when a ground
    truth is given.
    """
    from .metrics import align_and_error

    oh, ow = dataset.geometry.object_dims
    if init_object is None:
        state = ReconstructionState.constant_init((oh, ow), seed=seed)
    else:
        state = ReconstructionState(object_estimate=init_object.astype(complex,
                                                                       copy=True),
                                    rng=np.random.default_rng(seed))

    def log_error():
        if true_object is not None:
            err = align_and_error(state.object_estimate, true_object, mask)
            state.error_log.append((state.iteration, err))

    log_error()
    for _ in range(spec.warmup_iterations):
        position_sweep(state, dataset, WARMUP_RULE, 1.0)
        log_error()
    for _ in range(spec.refinement_iterations):
        position_sweep(state, dataset, spec.refinement_rule, spec.mu)
        log_error()
    return state


# ---------------------------------------------------------------------------
# intensity-constraint adaptation

@dataclass(frozen=True)
class AdapterConfig:
    mu_c: float = 0.1
    inner_sweeps: int = 5
    outer_rounds: int = 40
    inner_rule: object = WARMUP_RULE
    inner_mu: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.mu_c <= 1.0:
            raise ValueError(f"mu_c must lie in [0, 1], got {self.mu_c}")
        if self.inner_sweeps < 1 or self.outer_rounds < 1:
            raise ValueError("inner_sweeps and outer_rounds must be >= 1")


def adapt_constraints(dataset: Dataset, config: AdapterConfig,
                      init_object: Optional[np.ndarray] = None,
                      true_object: Optional[np.ndarray] = None,
                      mask: Optional[np.ndarray] = None,
                      seed: int = 0):
    """Outer loop that slowly replaces the measured intensities with the
    model's own predictions: starting from m~ = y, each round runs
    `inner_sweeps` position sweeps against m~, then mixes
    m~ <- (1 - mu_c) m~ + mu_c z0 with z0 the currently predicted stack.

    Returns (final state, final m~ stack).
    """
    from .metrics import align_and_error

    oh, ow = dataset.geometry.object_dims
    if init_object is None:
        state = ReconstructionState.constant_init((oh, ow), seed=seed)
    else:
        state = ReconstructionState(object_estimate=init_object.astype(complex,
                                                                       copy=True),
                                    rng=np.random.default_rng(seed))
    m_tilde = dataset.patterns.astype(float, copy=True)
    for _ in range(config.outer_rounds):
        for _ in range(config.inner_sweeps):
            position_sweep(state, dataset, config.inner_rule,
                           config.inner_mu, patterns=m_tilde)
            if true_object is not None:
                err = align_and_error(state.object_estimate, true_object, mask)
                state.error_log.append((state.iteration, err))
        if config.mu_c > 0.0:
            # the estimate already lives in the effective (real-space-
            # equivalent) domain, so always re-simulate in real-space terms
            z0 = simulate_dataset(state.object_estimate, dataset.probe,
                                  dataset.geometry, Mode.REAL_SPACE,
                                  dataset.oversampling)
            m_tilde = (1.0 - config.mu_c) * m_tilde + config.mu_c * z0
    return state, m_tilde
