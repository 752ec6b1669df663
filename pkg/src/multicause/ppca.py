"""Probabilistic PCA over the causes, and the held-out predictive check.

The generative model per unit: z ~ N(0, I_K), a | z ~ N(mu + W z, s2 I_D),
so marginally a ~ N(mu, W W' + s2 I). Fitting is plain EM with a seeded
Gaussian start; for complete data the iteration runs in covariance space
(O(D^3) per step regardless of N) and its maximum is cross-checkable
against the closed-form eigendecomposition solution. When a holdout mask
is supplied the EM conditions each row on its observed coordinates only,
so a model can be fitted without ever seeing the held-out cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import CauseMatrix, HoldoutMask
from .errors import NumericError, ValidationError

_LN_2PI = math.log(2.0 * math.pi)

# fit_ppca latent dimension defaults by outcome kind
DEFAULT_K = {"rating": 10, "popularity": 5, "custom": 5}


@dataclass
class PpcaConfig:
    max_iter: int = 1000
    tol: float = 1e-8  # relative log-likelihood change
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if self.tol < 0:
            raise ValidationError("tol must be >= 0")


@dataclass(eq=False)
class PpcaModel:
    loadings: np.ndarray  # (D, K)
    mean: np.ndarray  # (D,)
    noise_variance: float
    k: int
    log_likelihood: float
    fit_trace: list[float] = field(default_factory=list)
    converged: bool = True

    def __post_init__(self):
        self.loadings = np.array(self.loadings, dtype=float)
        self.mean = np.array(self.mean, dtype=float)
        if self.loadings.ndim != 2:
            raise ValidationError("loadings must be a D x K matrix")
        d, k = self.loadings.shape
        if k != self.k:
            raise ValidationError("loadings width disagrees with K")
        if not 1 <= k < d:
            raise ValidationError("need 1 <= K < D")
        if self.mean.shape != (d,):
            raise ValidationError("mean length disagrees with loadings")
        if not self.noise_variance > 0:
            raise ValidationError("noise variance must be strictly positive")

    @property
    def n_causes(self) -> int:
        return self.loadings.shape[0]

    def marginal_covariance(self) -> np.ndarray:
        w = self.loadings
        return w @ w.T + self.noise_variance * np.eye(w.shape[0])

    def to_dict(self) -> dict:
        return {
            "loadings": [[float(v) for v in row] for row in self.loadings],
            "mean": [float(v) for v in self.mean],
            "noise_variance": float(self.noise_variance),
            "K": int(self.k),
            "log_likelihood": float(self.log_likelihood),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "PpcaModel":
        try:
            return cls(
                loadings=np.array(payload["loadings"], dtype=float),
                mean=np.array(payload["mean"], dtype=float),
                noise_variance=float(payload["noise_variance"]),
                k=int(payload["K"]),
                log_likelihood=float(payload["log_likelihood"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad model payload: {exc}") from None


@dataclass(eq=False)
class SurrogateConfounders:
    """Posterior mean of z per unit.

    posterior_covariance is K x K (shared across units) when every
    coordinate was conditioned on, or N x K x K when rows condition on
    different observed subsets.
    """

    values: np.ndarray
    posterior_covariance: np.ndarray

    def __post_init__(self):
        self.values = np.array(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValidationError("surrogate confounders must be N x K")

    @property
    def k(self) -> int:
        return self.values.shape[1]


@dataclass(eq=False)
class PredictiveCheckResult:
    score: float
    per_unit_scores: np.ndarray
    threshold: float
    passed: bool
    replications: int
    mc_samples: int
    method: str = "mean"

    def to_dict(self) -> dict:
        return {
            "score": float(self.score),
            "per_unit_scores": [float(v) for v in self.per_unit_scores],
            "threshold": float(self.threshold),
            "passed": bool(self.passed),
            "replications": int(self.replications),
            "mc_samples": int(self.mc_samples),
            "method": self.method,
        }


def _require_complete(m: CauseMatrix, what: str) -> None:
    if m.has_missing:
        raise ValidationError(f"{what} requires a complete matrix; impute first")


def _init_params(
    x: np.ndarray, observed: np.ndarray, k: int, seed: int
) -> tuple[np.ndarray, float]:
    # Seeded Gaussian loadings scaled to the data; noise starts at half
    # the average column variance so EM can shrink or grow it freely.
    d = x.shape[1]
    col_var = np.array(
        [np.var(x[observed[:, j], j]) for j in range(d)], dtype=float
    )
    avg_var = float(col_var.mean())
    if avg_var <= 0:
        raise NumericError("cause matrix has no variance to model")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((d, k)) * math.sqrt(avg_var / k)
    return w, 0.5 * avg_var


def closed_form_max_loglik(m: CauseMatrix, k: int) -> float:
    """Maximum of the PPCA marginal likelihood from the sample spectrum.

    With eigenvalues l_1 >= ... >= l_D of the (1/N) covariance, the
    optimal noise is the mean of the D-K trailing eigenvalues and the
    maximum equals -N/2 [D ln 2pi + sum_{j<=K} ln l_j + (D-K) ln s2 + D].
    """
    _require_complete(m, "closed-form evaluation")
    x = m.values
    n, d = x.shape
    if not 1 <= k < d:
        raise ValidationError("need 1 <= K < D")
    xc = x - x.mean(axis=0)
    s = xc.T @ xc / n
    evals = np.linalg.eigvalsh(s)[::-1]
    s2 = float(evals[k:].mean())
    if s2 <= 0:
        raise NumericError("trailing eigenvalues are not positive; reduce K")
    top = np.maximum(evals[:k], s2)
    return float(-0.5 * n * (d * _LN_2PI + np.log(top).sum() + (d - k) * math.log(s2) + d))


def _complete_loglik(s: np.ndarray, n: int, w: np.ndarray, s2: float) -> float:
    d, k = w.shape
    m_mat = w.T @ w + s2 * np.eye(k)
    sign, logdet_m = np.linalg.slogdet(m_mat)
    if sign <= 0:
        raise NumericError("posterior precision lost positive definiteness")
    sw = s @ w
    tr_term = (np.trace(s) - np.trace(np.linalg.solve(m_mat, w.T @ sw))) / s2
    return float(
        -0.5 * n * (d * _LN_2PI + (d - k) * math.log(s2) + logdet_m + tr_term)
    )


def _fit_complete(
    m: CauseMatrix, k: int, cfg: PpcaConfig
) -> PpcaModel:
    x = m.values
    n, d = x.shape
    mu = x.mean(axis=0)
    xc = x - mu
    s = xc.T @ xc / n

    evals = np.linalg.eigvalsh(s)
    rank = int(np.sum(evals > max(evals.max(), 0.0) * 1e-12))
    if rank < k:
        raise NumericError(
            f"sample covariance has rank {rank} < K={k}; choose a smaller K"
        )

    w, s2 = _init_params(x, np.ones_like(x, dtype=bool), k, cfg.seed)
    eye_k = np.eye(k)
    trace = [_complete_loglik(s, n, w, s2)]
    converged = False
    for _ in range(cfg.max_iter):
        m_mat = w.T @ w + s2 * eye_k
        sw = s @ w
        g = np.linalg.solve(m_mat, w.T @ sw)  # M^-1 W' S W
        w_new = sw @ np.linalg.inv(s2 * eye_k + g)
        s2_new = float(
            (np.trace(s) - np.sum(np.linalg.solve(m_mat, sw.T) * w_new.T)) / d
        )
        if s2_new <= 0:
            raise NumericError("noise variance collapsed during EM")
        w, s2 = w_new, s2_new
        ll = _complete_loglik(s, n, w, s2)
        trace.append(ll)
        if abs(ll - trace[-2]) <= cfg.tol * max(1.0, abs(trace[-2])):
            converged = True
            break
    return PpcaModel(
        loadings=w,
        mean=mu,
        noise_variance=s2,
        k=k,
        log_likelihood=trace[-1],
        fit_trace=trace,
        converged=converged,
    )


def _patterns(observed: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Group rows sharing an observation pattern: [(pattern, row_idx), ...]."""
    pats, inverse = np.unique(observed, axis=0, return_inverse=True)
    return [(pats[g], np.flatnonzero(inverse == g)) for g in range(pats.shape[0])]


def _masked_estep(
    xc: np.ndarray,
    groups: list[tuple[np.ndarray, np.ndarray]],
    w: np.ndarray,
    s2: float,
) -> tuple[np.ndarray, np.ndarray, float]:
    d, k = w.shape
    eye_k = np.eye(k)
    a_stats = np.zeros((d, k, k))
    b_stats = np.zeros((d, k))
    ll = 0.0
    for pattern, rows in groups:
        wg = w[pattern]
        h = wg.shape[0]
        mg = wg.T @ wg + s2 * eye_k
        sign, logdet_m = np.linalg.slogdet(mg)
        if sign <= 0:
            raise NumericError("posterior precision lost positive definiteness")
        xg = xc[np.ix_(rows, pattern)]
        bg = xg @ wg
        means = np.linalg.solve(mg, bg.T).T
        cov = s2 * np.linalg.inv(mg)
        a_stats[pattern] += means.T @ means + rows.size * cov
        b_stats[pattern] += xg.T @ means
        quad = (xg * xg).sum() - (bg * means).sum()
        ll += -0.5 * (
            rows.size * (h * _LN_2PI + (h - k) * math.log(s2) + logdet_m)
            + quad / s2
        )
    return a_stats, b_stats, ll


def _fit_masked(
    m: CauseMatrix, k: int, cfg: PpcaConfig, mask: HoldoutMask
) -> PpcaModel:
    x = m.values
    n, d = x.shape
    if mask.held.shape != (n, d):
        raise ValidationError("holdout mask shape disagrees with the matrix")
    observed = ~mask.held
    col_counts = observed.sum(axis=0)
    if np.any(col_counts < 2):
        bad = [m.column_names[j] for j in np.flatnonzero(col_counts < 2)]
        raise ValidationError(f"column(s) almost fully held out: {bad}")

    mu = np.array(
        [x[observed[:, j], j].mean() for j in range(d)], dtype=float
    )
    xc = np.where(observed, x - mu, 0.0)
    groups = _patterns(observed)
    n_obs = float(observed.sum())
    sum_x2 = float((xc * xc).sum())

    w, s2 = _init_params(x, observed, k, cfg.seed)
    a_stats, b_stats, ll = _masked_estep(xc, groups, w, s2)
    trace = [ll]
    converged = False
    for _ in range(cfg.max_iter):
        w = np.linalg.solve(a_stats, b_stats[:, :, None])[:, :, 0]
        s2 = float(
            (
                sum_x2
                - 2.0 * np.sum(b_stats * w)
                + np.einsum("jk,jkl,jl->", w, a_stats, w)
            )
            / n_obs
        )
        if s2 <= 0:
            raise NumericError("noise variance collapsed during EM")
        a_stats, b_stats, ll = _masked_estep(xc, groups, w, s2)
        trace.append(ll)
        if abs(ll - trace[-2]) <= cfg.tol * max(1.0, abs(trace[-2])):
            converged = True
            break
    return PpcaModel(
        loadings=w,
        mean=mu,
        noise_variance=s2,
        k=k,
        log_likelihood=trace[-1],
        fit_trace=trace,
        converged=converged,
    )


def fit_ppca(
    m: CauseMatrix,
    k: int,
    cfg: PpcaConfig | None = None,
    mask: HoldoutMask | None = None,
) -> PpcaModel:
    """Fit the factor model by EM.

    With `mask` given, the held cells are excluded from fitting (each row
    contributes only its observed coordinates), which is what the
    held-out predictive check requires of its model. The column means
    are taken over the entries actually used.
    """
    cfg = cfg or PpcaConfig()
    _require_complete(m, "fit_ppca")
    n, d = m.values.shape
    if not 1 <= k < d:
        raise ValidationError(f"need 1 <= K < D, got K={k} with D={d}")
    if n <= k:
        raise ValidationError("need more units than latent dimensions")
    if mask is None:
        return _fit_complete(m, k, cfg)
    return _fit_masked(m, k, cfg, mask)


def posterior_mean(model: PpcaModel, m: CauseMatrix) -> SurrogateConfounders:
    """E[z | a] per unit: M^-1 W' (a - mu) with M = W'W + s2 I."""
    _require_complete(m, "posterior_mean")
    if m.n_causes != model.n_causes:
        raise ValidationError("matrix width disagrees with the model")
    w = model.loadings
    m_mat = w.T @ w + model.noise_variance * np.eye(model.k)
    xc = m.values - model.mean
    values = np.linalg.solve(m_mat, w.T @ xc.T).T
    cov = model.noise_variance * np.linalg.inv(m_mat)
    return SurrogateConfounders(values=values, posterior_covariance=cov)


def posterior_mean_partial(
    model: PpcaModel, m: CauseMatrix, mask: HoldoutMask
) -> SurrogateConfounders:
    """E[z | a_obs] per unit, conditioning only on unmasked coordinates.

    Rows with different holdout patterns get genuinely different linear
    maps, so these surrogates are not a single linear function of the
    causes (the full-posterior ones are, which would make a joint
    regression on causes plus surrogates rank deficient).
    """
    _require_complete(m, "posterior_mean_partial")
    n, d = m.values.shape
    if d != model.n_causes:
        raise ValidationError("matrix width disagrees with the model")
    if mask.held.shape != (n, d):
        raise ValidationError("holdout mask shape disagrees with the matrix")
    observed = ~mask.held
    w = model.loadings
    s2 = model.noise_variance
    k = model.k
    xc = np.where(observed, m.values - model.mean, 0.0)
    values = np.empty((n, k))
    covs = np.empty((n, k, k))
    for pattern, rows in _patterns(observed):
        wg = w[pattern]
        mg = wg.T @ wg + s2 * np.eye(k)
        bg = xc[np.ix_(rows, pattern)] @ wg
        values[rows] = np.linalg.solve(mg, bg.T).T
        covs[rows] = s2 * np.linalg.inv(mg)
    return SurrogateConfounders(values=values, posterior_covariance=covs)


def predictive_check(
    model: PpcaModel,
    m: CauseMatrix,
    mask: HoldoutMask,
    replications: int = 100,
    mc_samples: int = 100,
    seed: int = 0,
    threshold: float = 0.1,
    method: str = "mean",
) -> PredictiveCheckResult:
    """Held-out predictive check of the fitted factor model.

    Per unit, the statistic is the posterior-averaged held-out
    log-likelihood t(a_held) = (1/S) sum_s log p(a_held | z_s), with z_s
    drawn from the posterior given the observed coordinates. The unit's
    score is the fraction of `replications` model-generated held-out
    replicates whose statistic falls below the real one; the overall
    score averages units ("mean") or compares pooled sums ("pooled").
    Well-calibrated models score near 0.5, broken ones near 0.

    Each unit draws from its own RNG stream keyed by (seed, unit index),
    so any parallel split over units reproduces the serial run bit for
    bit.
    """
    _require_complete(m, "predictive_check")
    n, d = m.values.shape
    if d != model.n_causes:
        raise ValidationError("matrix width disagrees with the model")
    if mask.held.shape != (n, d):
        raise ValidationError("holdout mask shape disagrees with the matrix")
    if replications < 10 or mc_samples < 10:
        raise ValidationError("need replications >= 10 and mc_samples >= 10")
    if seed < 0:
        raise ValidationError("seed must be non-negative")
    if method not in ("mean", "pooled"):
        raise ValidationError("method must be 'mean' or 'pooled'")
    held = mask.held
    if np.any(~held.any(axis=1)):
        raise ValidationError("every row needs at least one held-out entry")

    w = model.loadings
    s2 = model.noise_variance
    sigma = math.sqrt(s2)
    k = model.k
    xc = m.values - model.mean

    per_unit = np.empty(n)
    pooled_real = 0.0
    pooled_rep = np.zeros(replications)
    for pattern, rows in _patterns(~held):
        wg = w[pattern]
        mg = wg.T @ wg + s2 * np.eye(k)
        lg = np.linalg.cholesky(mg)
        # factor F with F F' = posterior covariance s2 * M^-1
        factor = sigma * np.linalg.inv(lg).T
        means = np.linalg.solve(mg, (xc[np.ix_(rows, pattern)] @ wg).T).T
        hd = ~pattern
        wh = w[hd]
        h = int(hd.sum())
        const = -0.5 * h * math.log(2.0 * math.pi * s2)
        for idx, i in enumerate(rows):
            rng = np.random.default_rng([seed, int(i)])
            z_stat = means[idx] + rng.standard_normal((mc_samples, k)) @ factor.T
            nu = z_stat @ wh.T  # (S, H) predicted centered means
            nu_bar = nu.mean(axis=0)
            nu_sq = (nu * nu).mean(axis=0)

            def t_stat(a_held):
                # (1/S) sum_s log N(a | nu_s, s2) via the quadratic expansion
                quad = (a_held * a_held - 2.0 * a_held * nu_bar + nu_sq).sum(axis=-1)
                return const - quad / (2.0 * s2)

            t_real = t_stat(xc[i, hd])
            z_rep = means[idx] + rng.standard_normal((replications, k)) @ factor.T
            reps = z_rep @ wh.T + sigma * rng.standard_normal((replications, h))
            t_rep = t_stat(reps)
            per_unit[i] = float(np.mean(t_rep < t_real))
            pooled_real += t_real
            pooled_rep += t_rep

    if method == "mean":
        score = float(per_unit.mean())
    else:
        score = float(np.mean(pooled_rep < pooled_real))
    return PredictiveCheckResult(
        score=score,
        per_unit_scores=per_unit,
        threshold=threshold,
        passed=bool(score > threshold),
        replications=replications,
        mc_samples=mc_samples,
        method=method,
    )
