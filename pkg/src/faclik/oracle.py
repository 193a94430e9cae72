"""Reference computations by exhaustive enumeration.

These walk the raw model tables with plain Python loops and never touch the
packed, padded, or sparse code paths, so they can arbitrate disagreements
between backends. Guarded against state-space explosion; desk scale only.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .model import ModelSpec, validate_beliefs, validate_observation

NEG_INF = float("-inf")


class StateSpaceTooLargeError(ValueError):
    pass


def _joint_size(spec: ModelSpec) -> int:
    return math.prod(spec.cardinalities)


def brute_force_oracle(spec: ModelSpec, obs, beliefs) -> float:
    """Expected log-likelihood by nested enumeration of each modality's deps.

    Terms with zero belief weight are skipped (the 0*log0 := 0 convention);
    a zero likelihood under positive weight makes the result -inf.
    """
    if _joint_size(spec) > 10**6:
        raise StateSpaceTooLargeError("joint state space exceeds 10^6 states")
    outcomes = validate_observation(spec, obs)
    marginals = validate_beliefs(spec, beliefs)

    total = 0.0
    cards = spec.cardinalities
    for m, mod in enumerate(spec.modalities):
        table = spec.likelihoods[m].values
        o = int(outcomes[m])
        partial = 0.0
        dead = False
        for combo in itertools.product(*(range(cards[d]) for d in mod.deps)):
            q = 1.0
            for j, d in enumerate(mod.deps):
                q *= float(marginals[d][combo[j]])
            if q == 0.0:
                continue
            v = float(table[(o,) + combo])
            if v == 0.0:
                dead = True
            else:
                partial += q * math.log(v)
        total += NEG_INF if dead else partial
    return total


def joint_loglik_tensor(spec: ModelSpec, obs) -> np.ndarray:
    """Log-likelihood of `obs` over the fully enumerated joint state space.

    Entry (s_1 ... s_N) is the sum over modalities of log p(o_m | deps), with
    -inf wherever some modality assigns zero probability.
    """
    if _joint_size(spec) > 10**5:
        raise StateSpaceTooLargeError("joint state space exceeds 10^5 states")
    outcomes = validate_observation(spec, obs)

    n = spec.num_factors
    out = np.zeros(spec.cardinalities, dtype=np.float64)
    for m, mod in enumerate(spec.modalities):
        slice_m = spec.likelihoods[m].values[int(outcomes[m])]
        logs = np.full(slice_m.shape, NEG_INF)
        np.log(slice_m, out=logs, where=slice_m > 0)
        shape = [1] * n
        for j, d in enumerate(mod.deps):
            shape[d] = slice_m.shape[j]
        axes = tuple(int(a) for a in np.argsort(mod.deps))  # deps order -> factor order
        out = out + np.transpose(logs, axes).reshape(shape)
    return out
