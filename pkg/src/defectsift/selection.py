"""Two-stage statistical feature selection and per-feature separability scores."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import EmptyGrid, TooFewSamples
from .stats import (
    gaussian_bhattacharyya,
    hampel_filter,
    ks_normal_test,
    welch_t_test,
)

FISHER_INF = 1e30
MIN_B_SAMPLES = 8

STAGE_LOW_VARIANCE = "low-variance"
STAGE_CORRELATED = "correlated"
STAGE_KS = "ks-fail"
STAGE_T = "t-fail"
STAGE_BDIST = "bdist-fail"
STAGE_KEPT = "kept"


@dataclass(frozen=True)
class SelectionConfig:
    tau_var: float = 0.05
    delta_mean: float = 0.2
    top_n: int | None = None
    eps1: float = 1e-8
    eps2: float = 0.99
    alpha_ks: float = 0.05
    alpha_t: float = 0.05
    tau_b: float = 0.05
    hampel_window: int = 5
    hampel_k: float = 3.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionConfig":
        unknown = sorted(set(d) - {f.name for f in fields(cls)})
        if unknown:
            raise KeyError(f"unknown selection config keys: {unknown}")
        return cls(**d)


def _columns(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    return a.reshape(-1, 1) if a.ndim == 1 else a


def fisher_score(x_tp, x_fp) -> float:
    """``(mu1 - mu2)^2 / (var1 + var2)`` with population variances."""
    a = np.asarray(x_tp, dtype=float).ravel()
    b = np.asarray(x_fp, dtype=float).ravel()
    if a.size < 2 or b.size < 2:
        raise TooFewSamples("fisher_score needs >= 2 samples per class")
    gap = (a.mean() - b.mean()) ** 2
    den = a.var() + b.var()
    if den == 0:
        return 0.0 if gap == 0 else FISHER_INF
    return float(gap / den)


# --------------------------------------------------------------------------- #
# Approach A
# --------------------------------------------------------------------------- #


def joint_minmax(tp: np.ndarray, fp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column min-max over both classes together; constant columns map to 0."""
    both = np.vstack([tp, fp])
    lo, hi = both.min(axis=0), both.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (tp - lo) / span * (hi > lo), (fp - lo) / span * (hi > lo)


def approach_a(tp, fp, cfg: SelectionConfig | None = None):
    """Keep narrow, well-separated features after joint min-max scaling.

    Returns ``(kept, rows)``; ``kept`` is ordered by descending mean gap.
    """
    cfg = cfg or SelectionConfig()
    tp, fp = _columns(tp), _columns(fp)
    ntp, nfp = joint_minmax(tp, fp)
    mu_tp, mu_fp = ntp.mean(axis=0), nfp.mean(axis=0)
    var_tp, var_fp = ntp.var(axis=0), nfp.var(axis=0)
    gap = np.abs(mu_tp - mu_fp)
    keep = (np.maximum(var_tp, var_fp) <= cfg.tau_var) & (gap >= cfg.delta_mean)
    kept = sorted(np.flatnonzero(keep).tolist(), key=lambda i: (-gap[i], i))
    if cfg.top_n is not None:
        kept = kept[: cfg.top_n]
    kept_set = set(kept)
    rows = [
        {
            "verdict": "kept" if i in kept_set else "dropped",
            "mu_tp": float(mu_tp[i]),
            "mu_fp": float(mu_fp[i]),
            "var_tp": float(var_tp[i]),
            "var_fp": float(var_fp[i]),
        }
        for i in range(tp.shape[1])
    ]
    return kept, rows


# --------------------------------------------------------------------------- #
# Approach B
# --------------------------------------------------------------------------- #


def _zscore_pooled(tp: np.ndarray, fp: np.ndarray):
    both = np.vstack([tp, fp])
    mu, sd = both.mean(axis=0), both.std(axis=0)
    safe = np.where(sd > 0, sd, 1.0)
    z = (both - mu) / safe * (sd > 0)
    return z[: tp.shape[0]], z[tp.shape[0]:]


def _empty_b_row() -> dict:
    return {
        "stage": None,
        "std_z": None,
        "max_abs_corr": None,
        "d_ks_tp": None,
        "d_ks_fp": None,
        "p_ks_tp": None,
        "p_ks_fp": None,
        "p_ks_paper_tp": None,
        "p_ks_paper_fp": None,
        "t": None,
        "p_t": None,
        "dof": None,
        "d_b": None,
    }


def approach_b(tp, fp, cfg: SelectionConfig | None = None):
    """Hampel -> pooled z-score -> variance -> correlation -> K-S -> t -> Bhattacharyya.

    Returns ``(kept, rows, joint_d_b)``. ``kept`` is ordered by descending
    univariate Bhattacharyya distance; each row records the first failing stage
    and only the statistics computed up to it.
    """
    cfg = cfg or SelectionConfig()
    tp, fp = _columns(tp), _columns(fp)
    if tp.shape[0] < MIN_B_SAMPLES or fp.shape[0] < MIN_B_SAMPLES:
        raise TooFewSamples(f"approach B needs >= {MIN_B_SAMPLES} observations per class")
    d = tp.shape[1]
    rows = [_empty_b_row() for _ in range(d)]

    htp = np.column_stack([hampel_filter(tp[:, i], cfg.hampel_window, cfg.hampel_k) for i in range(d)])
    hfp = np.column_stack([hampel_filter(fp[:, i], cfg.hampel_window, cfg.hampel_k) for i in range(d)])
    ztp, zfp = _zscore_pooled(htp, hfp)
    z = np.vstack([ztp, zfp])

    alive = []
    for i in range(d):
        s = float(z[:, i].std())
        rows[i]["std_z"] = s
        if s < cfg.eps1:
            rows[i]["stage"] = STAGE_LOW_VARIANCE
        else:
            alive.append(i)

    if alive:
        corr = np.corrcoef(z[:, alive], rowvar=False).reshape(len(alive), len(alive))
    survivors = []
    for pos, i in enumerate(alive):
        prev = [p for p, j in enumerate(alive[:pos]) if j in survivors]
        r = float(np.max(np.abs(corr[pos, prev]))) if prev else 0.0
        rows[i]["max_abs_corr"] = r
        if r > cfg.eps2:
            rows[i]["stage"] = STAGE_CORRELATED
        else:
            survivors.append(i)

    kept = []
    for i in survivors:
        row = rows[i]
        d_tp, p_tp, pp_tp = ks_normal_test(ztp[:, i])
        d_fp, p_fp, pp_fp = ks_normal_test(zfp[:, i])
        row.update(d_ks_tp=d_tp, d_ks_fp=d_fp, p_ks_tp=p_tp, p_ks_fp=p_fp,
                   p_ks_paper_tp=pp_tp, p_ks_paper_fp=pp_fp)
        if not (p_tp > cfg.alpha_ks and p_fp > cfg.alpha_ks):
            row["stage"] = STAGE_KS
            continue
        t, p, dof = welch_t_test(ztp[:, i], zfp[:, i])
        row.update(t=t, p_t=p, dof=dof)
        if not p < cfg.alpha_t:
            row["stage"] = STAGE_T
            continue
        db = gaussian_bhattacharyya(ztp[:, i].mean(), ztp[:, i].var(), zfp[:, i].mean(), zfp[:, i].var())
        row["d_b"] = db
        if db < cfg.tau_b:
            row["stage"] = STAGE_BDIST
            continue
        row["stage"] = STAGE_KEPT
        kept.append(i)

    kept.sort(key=lambda i: (-rows[i]["d_b"], i))
    joint = None
    if kept:
        a, b = ztp[:, kept], zfp[:, kept]
        joint = gaussian_bhattacharyya(a.mean(axis=0), np.atleast_2d(np.cov(a, rowvar=False, bias=True)),
                                       b.mean(axis=0), np.atleast_2d(np.cov(b, rowvar=False, bias=True)))
    if cfg.top_n is not None:
        kept = kept[: cfg.top_n]
    return kept, rows, joint


# --------------------------------------------------------------------------- #
# Report
# --------------------------------------------------------------------------- #


@dataclass
class SelectionReport:
    names: list
    fisher: list
    a_rows: list | None = None
    b_rows: list | None = None
    kept_a: list | None = None
    kept_b: list | None = None
    joint_d_b: float | None = None
    config: dict = field(default_factory=dict)

    def kept(self, approach: str = "b") -> list[int]:
        k = self.kept_b if approach == "b" else self.kept_a
        return list(k or [])

    def to_dict(self) -> dict:
        features = []
        for i, name in enumerate(self.names):
            entry = {"index": i, "name": name, "fisher_score": self.fisher[i]}
            if self.a_rows is not None:
                entry["approach_a"] = self.a_rows[i]
            if self.b_rows is not None:
                entry["approach_b"] = self.b_rows[i]
            features.append(entry)
        out = {"config": self.config, "features": features}
        if self.kept_a is not None:
            out["kept_a"] = [self.names[i] for i in self.kept_a]
        if self.kept_b is not None:
            out["kept_b"] = [self.names[i] for i in self.kept_b]
            out["joint_d_b"] = self.joint_d_b
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionReport":
        feats = d["features"]
        names = [f["name"] for f in feats]
        index = {n: i for i, n in enumerate(names)}
        has_a = bool(feats) and "approach_a" in feats[0]
        has_b = bool(feats) and "approach_b" in feats[0]
        return cls(
            names,
            [f["fisher_score"] for f in feats],
            [f["approach_a"] for f in feats] if has_a else None,
            [f["approach_b"] for f in feats] if has_b else None,
            [index[n] for n in d["kept_a"]] if "kept_a" in d else None,
            [index[n] for n in d["kept_b"]] if "kept_b" in d else None,
            d.get("joint_d_b"),
            d.get("config", {}),
        )

    def to_table(self) -> str:
        def fmt(v):
            if v is None:
                return "-"
            return f"{v:.4g}" if isinstance(v, float) else str(v)

        head = ["idx", "name", "fisher"]
        if self.a_rows is not None:
            head += ["A", "gap"]
        if self.b_rows is not None:
            head += ["B stage", "t", "D_B"]
        lines = []
        for i, name in enumerate(self.names):
            cells = [str(i), name, fmt(self.fisher[i])]
            if self.a_rows is not None:
                a = self.a_rows[i]
                cells += [a["verdict"], fmt(abs(a["mu_tp"] - a["mu_fp"]))]
            if self.b_rows is not None:
                b = self.b_rows[i]
                cells += [b["stage"], fmt(b["t"]), fmt(b["d_b"])]
            lines.append(cells)
        widths = [max(len(r[k]) for r in [head] + lines) for k in range(len(head))]
        out = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in [head] + lines]
        if self.kept_a is not None:
            out.append("kept (A): " + ", ".join(self.names[i] for i in self.kept_a))
        if self.kept_b is not None:
            out.append("kept (B): " + ", ".join(self.names[i] for i in self.kept_b))
        return "\n".join(out)


def select(tp, fp, names=None, approach: str = "both", cfg: SelectionConfig | None = None) -> SelectionReport:
    cfg = cfg or SelectionConfig()
    tp, fp = _columns(tp), _columns(fp)
    d = tp.shape[1]
    names = list(names) if names is not None else [f"f{i}" for i in range(d)]
    fisher = [fisher_score(tp[:, i], fp[:, i]) for i in range(d)]
    rep = SelectionReport(names, fisher, config=cfg.to_dict())
    if approach in ("a", "both"):
        rep.kept_a, rep.a_rows = approach_a(tp, fp, cfg)
    if approach in ("b", "both"):
        rep.kept_b, rep.b_rows, rep.joint_d_b = approach_b(tp, fp, cfg)
    if approach not in ("a", "b", "both"):
        raise ValueError(f"approach must be a, b or both, got {approach!r}")
    return rep


# --------------------------------------------------------------------------- #
# Thresholds
# --------------------------------------------------------------------------- #


def separation_objective(v_tp, v_fp) -> float:
    a = np.asarray(v_tp, dtype=float)
    b = np.asarray(v_fp, dtype=float)
    return float(abs(a.mean() - b.mean()) + abs(np.median(a) - np.median(b)))


def optimize_param_threshold(param_grid, feature_fn, tp_images, fp_images):
    """Grid value maximizing ``|mean gap| + |median gap|`` of ``feature_fn(param, image)``.

    Ties go to the smallest parameter. Returns ``(best, objective_by_param)``.
    """
    grid = sorted(param_grid)
    if not grid:
        raise EmptyGrid("parameter grid is empty")
    scores = {}
    best, best_val = grid[0], -math.inf
    for p in grid:
        v = separation_objective([feature_fn(p, im) for im in tp_images],
                                 [feature_fn(p, im) for im in fp_images])
        scores[p] = v
        if v > best_val:
            best, best_val = p, v
    return best, scores


@dataclass(frozen=True)
class DecisionThreshold:
    theta: float
    direction: str
    balanced_accuracy: float

    def predict(self, scores) -> np.ndarray:
        s = np.asarray(scores, dtype=float)
        return (s > self.theta if self.direction == "above" else s < self.theta).astype(np.int64)

    def to_dict(self) -> dict:
        return asdict(self)


def balanced_accuracy(pred_tp: np.ndarray, pred_fp: np.ndarray) -> float:
    return 0.5 * (float(np.mean(pred_tp == 1)) + float(np.mean(pred_fp == 0)))


def decision_threshold(scores_tp, scores_fp) -> DecisionThreshold:
    """Midpoint threshold maximizing balanced accuracy; ties go to the smaller theta."""
    a = np.asarray(scores_tp, dtype=float).ravel()
    b = np.asarray(scores_fp, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise TooFewSamples("decision_threshold needs a score per class")
    vals = np.unique(np.concatenate([a, b]))
    cands = (vals[:-1] + vals[1:]) / 2.0 if vals.size > 1 else vals
    # Rates of "score > theta" for each candidate, per class.
    # Counts rather than 1 - rate keep the result bitwise equal to balanced_accuracy.
    above_tp = (a[None, :] > cands[:, None]).sum(axis=1) / a.size
    not_above_fp = (b[None, :] <= cands[:, None]).sum(axis=1) / b.size
    below_tp = (a[None, :] < cands[:, None]).sum(axis=1) / a.size
    not_below_fp = (b[None, :] >= cands[:, None]).sum(axis=1) / b.size
    ba_above = 0.5 * (above_tp + not_above_fp)
    ba_below = 0.5 * (below_tp + not_below_fp)
    best = None
    for k, theta in enumerate(cands):
        for direction, ba in (("above", ba_above[k]), ("below", ba_below[k])):
            if best is None or ba > best[2] + 1e-15:
                best = (float(theta), direction, float(ba))
    return DecisionThreshold(*best)
