"""Monte Carlo checks of the concentration results behind the method.

Three executable experiments:

* lazy_hoeffding_tail — a Bernoulli-masked sum of bounded mean-zero
  variables exceeds t*M*sqrt(alpha*p) with probability at most
  2*exp(-t^2/4).
* sparse_opnorm_scaling — the expected operator norm of a symmetric
  bounded noise matrix masked entrywise at rate alpha grows like
  sqrt(alpha*p): the normalized ratio stays flat as p doubles.
* shrink_ratio_experiment — on the masked-noise model of a sparse truth
  plus rate-gamma^(-s) false positives, one masking step at ratio
  1/gamma moves the expected distance to the identity (and to the truth)
  by a factor gamma^(-1/2).

All experiments are deterministic given their seed; tolerances here are
test-design pins, not claims from the underlying theory, which is
asymptotic in p.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .matcore import operator_norm
from .synthdata import GraphModel


@dataclass
class TrialReport:
    experiment: str
    params: dict = field(default_factory=dict)
    empirical: object = None
    bound: object = None
    stderr: object = None
    passed: bool | None = None

    def to_json_dict(self) -> dict:
        return {"experiment": self.experiment, "params": self.params,
                "empirical": self.empirical, "bound": self.bound,
                "stderr": self.stderr, "pass": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def lazy_hoeffding_tail(p: int, alpha: float, m_bound: float, t: float,
                        trials: int, seed: int,
                        chunk: int = 2000) -> TrialReport:
    """Tail frequency of |sum b_i Z_i| above t*M*sqrt(alpha*p).

    Z_i are uniform on [-M, M] (bounded, mean zero), b_i Bernoulli(alpha).
    The exceedance is strict, so the degenerate alpha=0 case reports a
    zero tail for any positive t. Passes when the frequency is at most
    2*exp(-t^2/4) plus three Monte Carlo standard errors.
    """
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must be in [0,1], got {alpha}")
    if m_bound <= 0:
        raise ValueError(f"bound M must be positive, got {m_bound}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if trials < 1000:
        raise ValueError(f"need at least 1000 trials, got {trials}")
    rng = np.random.default_rng(seed)
    threshold = t * m_bound * math.sqrt(alpha * p)
    exceed = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        z = rng.uniform(-m_bound, m_bound, size=(m, p))
        b = rng.random(size=(m, p)) < alpha
        sums = np.abs((z * b).sum(axis=1))
        exceed += int((sums > threshold).sum())
        done += m
    empirical = exceed / trials
    stderr = math.sqrt(empirical * (1 - empirical) / trials)
    bound = 2.0 * math.exp(-t * t / 4.0)
    return TrialReport(
        experiment="lazy_hoeffding_tail",
        params={"p": p, "alpha": alpha, "M_bound": m_bound, "t": t,
                "trials": trials, "seed": seed},
        empirical=empirical, bound=bound, stderr=stderr,
        passed=empirical <= bound + 3 * stderr)


def _masked_symmetric(p: int, upper_vals: np.ndarray, iu) -> np.ndarray:
    out = np.zeros((p, p))
    out[iu] = upper_vals
    return out + out.T


def sparse_opnorm_scaling(p_list, alpha: float, trials: int, seed: int,
                          drift_limit: float = 0.25,
                          norm_method: str = "auto") -> TrialReport:
    """Mean operator norm of a masked symmetric noise matrix, scaled by
    sqrt(alpha*p), for each p in p_list.

    Entries are uniform on [-1,1] with zero diagonal; the mask is
    symmetric Bernoulli(alpha). Passes when the scaled ratio moves by
    less than `drift_limit` between consecutive p and first-to-last.
    """
    p_list = [int(p) for p in p_list]
    if not p_list or any(p < 2 for p in p_list):
        raise ValueError(f"need dimensions >= 2, got {p_list}")
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must be in [0,1], got {alpha}")
    if trials < 1:
        raise ValueError(f"need trials >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    ratios = {}
    stderrs = {}
    for p in p_list:
        iu = np.triu_indices(p, k=1)
        ncells = iu[0].size
        norms = np.empty(trials)
        for i in range(trials):
            vals = rng.uniform(-1.0, 1.0, size=ncells)
            mask = rng.random(size=ncells) < alpha
            pi = _masked_symmetric(p, vals * mask, iu)
            norms[i] = operator_norm(pi, method=norm_method)
        scale = math.sqrt(alpha * p)
        if scale == 0.0:
            ratios[p] = 0.0 if np.all(norms == 0) else math.inf
            stderrs[p] = 0.0
        else:
            ratios[p] = float(norms.mean() / scale)
            sd = float(norms.std(ddof=1)) if trials > 1 else 0.0
            stderrs[p] = sd / math.sqrt(trials) / scale
    seq = [ratios[p] for p in p_list]

    def drift(a: float, b: float) -> float:
        if a == b:
            return 0.0
        if a == 0.0:
            return math.inf
        return abs(b / a - 1.0)

    drifts = [drift(seq[i], seq[i + 1]) for i in range(len(seq) - 1)]
    drifts.append(drift(seq[0], seq[-1]))
    passed = all(d < drift_limit for d in drifts)
    return TrialReport(
        experiment="sparse_opnorm_scaling",
        params={"p_list": p_list, "alpha": alpha, "trials": trials, "seed": seed},
        empirical={"ratios": {str(p): ratios[p] for p in p_list},
                   "max_drift": max(drifts)},
        bound=drift_limit,
        stderr={str(p): stderrs[p] for p in p_list},
        passed=passed)


def shrink_ratio_experiment(model: GraphModel, gamma: float, s: int,
                            noise_scale: float, trials: int, seed: int,
                            tolerance: float = 0.10,
                            norm_method: str = "auto") -> TrialReport:
    """Ratio of expected distances across one masking step.

    Per trial a rate-gamma^(-s) Bernoulli mask (and a nested refinement at
    rate gamma^(-s-1), sharing the same bounded noise so the step mirrors
    an entry-removing threshold) is planted on the zero cells of the
    model. Reports E||next - I|| / E||current - I|| and the
    truth-centered analogue; both should sit within `tolerance` of
    gamma^(-1/2) once p is large (p >= 1000 recommended). If the
    denominators vanish the report is flagged degenerate instead of
    producing a ratio.
    """
    if not gamma > 1:
        raise ValueError(f"gamma must exceed 1, got {gamma}")
    if s < 1:
        raise ValueError(f"need s >= 1, got {s}")
    if noise_scale <= 0:
        raise ValueError(f"noise scale must be positive, got {noise_scale}")
    if trials < 1:
        raise ValueError(f"need trials >= 1, got {trials}")
    omega = model.matrix
    p = omega.shape[0]
    if model.kappa ** 2 >= p:
        raise ValueError(
            f"model has kappa={model.kappa} with p={p}; the sparse regime "
            f"needs kappa well below sqrt(p)")
    iu = np.triu_indices(p, k=1)
    zero_upper = omega[iu] == 0
    iu_zero = (iu[0][zero_upper], iu[1][zero_upper])
    ncells = iu_zero[0].size
    eye = np.eye(p)
    rate_s = gamma ** -float(s)

    rng = np.random.default_rng(seed)
    norms = {"id_s": np.empty(trials), "id_s1": np.empty(trials),
             "truth_s": np.empty(trials), "truth_s1": np.empty(trials)}
    for i in range(trials):
        noise = rng.uniform(-noise_scale, noise_scale, size=ncells)
        mask_s = rng.random(size=ncells) < rate_s
        mask_s1 = mask_s & (rng.random(size=ncells) < 1.0 / gamma)
        cur = omega + _masked_symmetric(p, noise * mask_s, iu_zero)
        nxt = omega + _masked_symmetric(p, noise * mask_s1, iu_zero)
        norms["id_s"][i] = operator_norm(cur - eye, method=norm_method)
        norms["id_s1"][i] = operator_norm(nxt - eye, method=norm_method)
        norms["truth_s"][i] = operator_norm(cur - omega, method=norm_method)
        norms["truth_s1"][i] = operator_norm(nxt - omega, method=norm_method)

    target = gamma ** -0.5
    params = {"kind": model.kind, "p": p, "kappa": model.kappa, "gamma": gamma,
              "s": s, "noise_scale": noise_scale, "trials": trials, "seed": seed}

    def ratio_of(num_key: str, den_key: str):
        num, den = norms[num_key].mean(), norms[den_key].mean()
        if den == 0.0:
            return None, None
        r = num / den
        if trials > 1:
            se_num = norms[num_key].std(ddof=1) / math.sqrt(trials)
            se_den = norms[den_key].std(ddof=1) / math.sqrt(trials)
            se = r * math.sqrt((se_num / num) ** 2 + (se_den / den) ** 2) if num > 0 else 0.0
        else:
            se = 0.0
        return float(r), float(se)

    ratio_id, se_id = ratio_of("id_s1", "id_s")
    ratio_truth, se_truth = ratio_of("truth_s1", "truth_s")
    degenerate = ratio_id is None or ratio_truth is None
    if degenerate:
        passed = False
    else:
        passed = (abs(ratio_id / target - 1.0) <= tolerance
                  and abs(ratio_truth / target - 1.0) <= tolerance)
    return TrialReport(
        experiment="shrink_ratio",
        params=params,
        empirical={"ratio_identity": ratio_id, "ratio_truth": ratio_truth,
                   "target": target, "degenerate": degenerate},
        bound=tolerance,
        stderr={"ratio_identity": se_id, "ratio_truth": se_truth},
        passed=passed)
