"""Alternating-minimization engine for the dictionary-pair model.

The model objective per class l (all norms over real matrices) is

    ||X_l' - X_l' P_l' D_l'||_21
      + alpha * (||P_l Xbar_l||_F^2 + ||P_l'||_21)
      + beta  * (||X_l - X_l W_l||_F^2 + ||P_l X_l - P_l X_l W_l||_F^2 + ||W_l||_F^2)
      + lam   * (||P_l X_l - M_l||_F^2 - N_l ||P_l X_l - Mbar_l||_F^2)

subject to columns of D_l summing to one and diag(W_l) = 0, where ||R||_21 sums
the Euclidean norms of the rows of R (' denotes transpose). The relaxed
objective splits the reconstruction through explicit nonnegative codes S_l:

    ||X_l' - S_l' D_l'||_21 + ||S_l' - X_l' P_l'||_21  (+ the same penalties)

Row-sum norms are handled by iterative reweighting: a row of norm r carries a
weight 1/(2r + tau), which turns each ||.||_21 term into a weighted quadratic.
One training iteration sweeps the classes in order and updates, per class:
analysis block P_l (linear solve), mean matrices, codes S_l (multiplicative
rule), synthesis block D_l (ridge solve + column-sum normalization), the three
reweighting diagonals, and the reconstruction weights W_l (linear solve +
diagonal zeroing). The loop stops when the model objective changes by less
than tol between consecutive sweeps.
"""

from dataclasses import dataclass, field

import numpy as np

from .data import LabeledDataset
from .model import (
    CodingState,
    DictionaryPair,
    Hyperparams,
    MeanMatrices,
    ReweightState,
    WeightState,
    init_state,
)

# condition estimate above which tau*I is added before the analysis solve
COND_GUARD = 1e12
# |column sum| below which a synthesis atom falls back to the uniform column
SUM_FLOOR = 1e-10


class NumericalError(RuntimeError):
    """A linear system remained unsolvable after tau-regularization."""


@dataclass
class TrainHistory:
    """Per-iteration objective values, iterate deltas, and the stopping outcome."""

    objective_model: list[float] = field(default_factory=list)
    objective_relaxed: list[float] = field(default_factory=list)
    delta_P: list[float] = field(default_factory=list)
    delta_S: list[float] = field(default_factory=list)
    delta_D: list[float] = field(default_factory=list)
    delta_W: list[float] = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False


def smoothed_row_norms(R: np.ndarray, tau: float) -> np.ndarray:
    """Per-row 2*||row||_2 + tau; strictly positive for tau > 0."""
    if tau <= 0:
        raise ValueError("tau must be > 0")
    return 2.0 * np.sqrt(np.sum(R * R, axis=1)) + tau


def row_norm_sum(R: np.ndarray) -> float:
    """Unsmoothed ||R||_21: the sum of Euclidean row norms."""
    return float(np.sum(np.sqrt(np.sum(R * R, axis=1))))


def compute_means(P_l: np.ndarray, X_l: np.ndarray, Xbar_l: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means of P_l X_l and P_l Xbar_l, each replicated to k_l x N_l.

    With a single class the complement is empty and the second matrix is zero.
    """
    N_l = X_l.shape[1]
    m = (P_l @ X_l).mean(axis=1)
    M_l = np.tile(m[:, None], (1, N_l))
    if Xbar_l.shape[1] == 0:
        Mbar_l = np.zeros_like(M_l)
    else:
        mbar = (P_l @ Xbar_l).mean(axis=1)
        Mbar_l = np.tile(mbar[:, None], (1, N_l))
    return M_l, Mbar_l


def update_reweights(
    X_l: np.ndarray, D_l: np.ndarray, P_l: np.ndarray, S_l: np.ndarray, tau: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Refresh the three reweighting diagonals from the current blocks.

    h_i = 1 / (2||column i of P_l|| + tau)            (length n)
    u_i = 1 / (2||row i of S_l' - X_l' P_l'|| + tau)  (length N_l)
    v_i = 1 / (2||row i of X_l' - S_l' D_l'|| + tau)  (length N_l)
    """
    h = 1.0 / smoothed_row_norms(P_l.T, tau)
    u = 1.0 / smoothed_row_norms(S_l.T - X_l.T @ P_l.T, tau)
    v = 1.0 / smoothed_row_norms(X_l.T - S_l.T @ D_l.T, tau)
    return h, u, v


def _solve_right(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve Y A = B with one step of iterative refinement."""
    Y = np.linalg.solve(A.T, B.T).T
    R = B - Y @ A
    Y += np.linalg.solve(A.T, R.T).T
    return Y


def analysis_system(
    X_l: np.ndarray,
    Xbar_l: np.ndarray,
    S_l: np.ndarray,
    W_l: np.ndarray,
    u: np.ndarray,
    h: np.ndarray,
    M_l: np.ndarray,
    Mbar_l: np.ndarray,
    hp: Hyperparams,
) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side and system matrix of the analysis update P_l A = B.

    B = 4 S_l U X_l' + 2 lam M_l X_l' - 2 lam N_l Mbar_l X_l'
    A = Lambda + Upsilon with
    Lambda  = 4 X_l U X_l' + 2 alpha Xbar_l Xbar_l' + 4 alpha diag(h)
    Upsilon = beta X_l Q X_l' + beta X_l Q' X_l' + 2 lam (N_l - 1) X_l X_l'
    Q       = (I - W_l)(I - W_l)'

    tau*I is added only when the condition estimate of A exceeds 1e12.
    """
    n, N_l = X_l.shape
    I_N = np.eye(N_l)
    Q = (I_N - W_l) @ (I_N - W_l).T
    B = (
        4.0 * (S_l * u) @ X_l.T
        + 2.0 * hp.lam * (M_l @ X_l.T)
        - 2.0 * hp.lam * N_l * (Mbar_l @ X_l.T)
    )
    A = 4.0 * (X_l * u) @ X_l.T + 2.0 * hp.alpha * (Xbar_l @ Xbar_l.T)
    A[np.diag_indices(n)] += 4.0 * hp.alpha * h
    A = (
        A
        + hp.beta * (X_l @ Q @ X_l.T)
        + hp.beta * (X_l @ Q.T @ X_l.T)
        + 2.0 * hp.lam * (N_l - 1) * (X_l @ X_l.T)
    )
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_GUARD:
        A = A + hp.tau * np.eye(n)
    return A, B


def update_P(
    X_l: np.ndarray,
    Xbar_l: np.ndarray,
    S_l: np.ndarray,
    W_l: np.ndarray,
    u: np.ndarray,
    h: np.ndarray,
    M_l: np.ndarray,
    Mbar_l: np.ndarray,
    hp: Hyperparams,
) -> np.ndarray:
    """Closed-form analysis update P_l = B @ inv(A); see analysis_system.

    The mean matrices are held constant here and refreshed right after.
    """
    A, B = analysis_system(X_l, Xbar_l, S_l, W_l, u, h, M_l, Mbar_l, hp)
    try:
        return _solve_right(A, B)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"analysis system singular after tau-regularization (cond {np.linalg.cond(A):.3e})"
        ) from exc


def update_S(
    X_l: np.ndarray,
    D_l: np.ndarray,
    P_l: np.ndarray,
    S_l: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    tau: float,
) -> np.ndarray:
    """Multiplicative code update; preserves entrywise nonnegativity.

    s <- s * (D_l' X_l V + P_l X_l U) / (D_l' D_l S_l V + S_l U), clamping
    negative numerator entries to 0 and flooring the denominator at tau.
    """
    num = (D_l.T @ X_l) * v + (P_l @ X_l) * u
    den = (D_l.T @ D_l @ S_l) * v + S_l * u
    np.maximum(num, 0.0, out=num)
    np.maximum(den, tau, out=den)
    return S_l * num / den


def solve_synthesis(X_l: np.ndarray, S_l: np.ndarray, v: np.ndarray, tau: float) -> np.ndarray:
    """Ridge solve for the synthesis block, before column normalization:
    D_l = (X_l V S_l') (S_l V S_l' + tau I)^-1."""
    k = S_l.shape[0]
    B = (X_l * v) @ S_l.T
    A = (S_l * v) @ S_l.T + tau * np.eye(k)
    return _solve_right(A, B)


def _normalize_columns(D_l: np.ndarray, n: int) -> np.ndarray:
    """Scale each column to sum one; columns whose sum magnitude falls below
    1e-10 become the uniform column (every entry 1/n) instead of dividing by
    a vanishing sum."""
    sums = D_l.sum(axis=0)
    degenerate = np.abs(sums) < SUM_FLOOR
    return np.where(degenerate[None, :], 1.0 / n, D_l / np.where(degenerate, 1.0, sums)[None, :])


def update_D(X_l: np.ndarray, S_l: np.ndarray, v: np.ndarray, tau: float) -> np.ndarray:
    """Synthesis update: ridge solve, then column-sum normalization."""
    return _normalize_columns(solve_synthesis(X_l, S_l, v, tau), X_l.shape[0])


def update_W(X_l: np.ndarray, P_l: np.ndarray) -> np.ndarray:
    """Reconstruction-weight update: W_l = (G + I)^-1 G with zeroed diagonal,
    G = X_l' X_l + X_l' P_l' P_l X_l. G + I is symmetric positive definite."""
    PX = P_l @ X_l
    G = X_l.T @ X_l + PX.T @ PX
    W_l = np.linalg.solve(G + np.eye(G.shape[0]), G)
    np.fill_diagonal(W_l, 0.0)
    return W_l


def _class_views(ds: LabeledDataset) -> tuple[list[np.ndarray], list[np.ndarray]]:
    Xs = [ds.class_matrix(l) for l in range(1, ds.n_classes + 1)]
    Xbars = [ds.complement_matrix(l) for l in range(1, ds.n_classes + 1)]
    return Xs, Xbars


def _quadratic_penalties(X_l, Xbar_l, P_l, W_l, hp: Hyperparams) -> float:
    """The beta (locality) and lam (code-discrimination) penalty terms."""
    total = 0.0
    PX = P_l @ X_l
    if hp.beta:
        total += hp.beta * (
            np.linalg.norm(X_l - X_l @ W_l) ** 2
            + np.linalg.norm(PX - PX @ W_l) ** 2
            + np.linalg.norm(W_l) ** 2
        )
    if hp.lam:
        N_l = X_l.shape[1]
        M_l, Mbar_l = compute_means(P_l, X_l, Xbar_l)
        total += hp.lam * (
            np.linalg.norm(PX - M_l) ** 2 - N_l * np.linalg.norm(PX - Mbar_l) ** 2
        )
    return total


def objective_relaxed(
    ds: LabeledDataset,
    pair: DictionaryPair,
    codes: CodingState,
    weights: WeightState,
    hp: Hyperparams,
) -> float:
    """Relaxed objective with explicit codes; row-sum norms unsmoothed."""
    Xs, Xbars = _class_views(ds)
    total = 0.0
    for X_l, Xbar_l, D_l, P_l, S_l, W_l in zip(Xs, Xbars, pair.D, pair.P, codes.S, weights.W):
        total += row_norm_sum(X_l.T - S_l.T @ D_l.T)
        total += row_norm_sum(S_l.T - X_l.T @ P_l.T)
        total += hp.alpha * (np.linalg.norm(P_l @ Xbar_l) ** 2 + row_norm_sum(P_l.T))
        total += _quadratic_penalties(X_l, Xbar_l, P_l, W_l, hp)
    return total


def objective_model(
    ds: LabeledDataset, pair: DictionaryPair, weights: WeightState, hp: Hyperparams
) -> float:
    """Model objective with codes eliminated (reconstruction through P then D)."""
    Xs, Xbars = _class_views(ds)
    total = 0.0
    for X_l, Xbar_l, D_l, P_l, W_l in zip(Xs, Xbars, pair.D, pair.P, weights.W):
        total += row_norm_sum(X_l.T - X_l.T @ P_l.T @ D_l.T)
        total += hp.alpha * (np.linalg.norm(P_l @ Xbar_l) ** 2 + row_norm_sum(P_l.T))
        total += _quadratic_penalties(X_l, Xbar_l, P_l, W_l, hp)
    return total


def surrogate_relaxed(
    ds: LabeledDataset,
    pair: DictionaryPair,
    codes: CodingState,
    weights: WeightState,
    rw: ReweightState,
    hp: Hyperparams,
) -> float:
    """Relaxed objective with every row-sum norm replaced by its weighted
    quadratic (trace) form under the given diagonals; a sweep run with frozen
    diagonals is expected not to increase this quantity."""
    Xs, Xbars = _class_views(ds)
    total = 0.0
    for X_l, Xbar_l, D_l, P_l, S_l, W_l, h, u, v in zip(
        Xs, Xbars, pair.D, pair.P, codes.S, weights.W, rw.h, rw.u, rw.v
    ):
        R1 = X_l - D_l @ S_l
        R2 = S_l - P_l @ X_l
        total += 2.0 * float(np.sum((R1 * R1) * v))
        total += 2.0 * float(np.sum((R2 * R2) * u))
        total += hp.alpha * (
            np.linalg.norm(P_l @ Xbar_l) ** 2 + 2.0 * float(np.sum((P_l * P_l) * h))
        )
        total += _quadratic_penalties(X_l, Xbar_l, P_l, W_l, hp)
    return total


def numeric_gradient(f, M: np.ndarray, h: float) -> np.ndarray:
    """Entrywise central-difference gradient of a scalar matrix function."""
    if h <= 0:
        raise ValueError("step h must be > 0")
    G = np.zeros_like(M, dtype=float)
    it = np.nditer(M, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        Mp = M.copy()
        Mp[idx] += h
        Mm = M.copy()
        Mm[idx] -= h
        G[idx] = (f(Mp) - f(Mm)) / (2.0 * h)
    return G


def _assembled_delta(old: list[np.ndarray], new: list[np.ndarray]) -> float:
    return float(np.sqrt(sum(np.linalg.norm(a - b) ** 2 for a, b in zip(old, new))))


def _check_solve_residual(Y, A, B, what: str) -> None:
    res = np.linalg.norm(Y @ A - B)
    if res > 1e-8 * max(np.linalg.norm(B), np.finfo(float).tiny):
        raise NumericalError(f"{what} solve residual {res:.3e} exceeds 1e-8 relative")


def train(
    ds: LabeledDataset,
    hp: Hyperparams,
    mode: str = "full",
    self_check: bool = False,
) -> tuple[DictionaryPair, CodingState, WeightState, TrainHistory]:
    """Run the alternating-minimization loop.

    mode "full" runs every update; "reduced" requires beta = lam = 0 and skips
    the W updates (they no longer enter the objective); "frobenius" is reduced
    mode with the synthesis-fit reweighting v held at identity, turning the
    robust reconstruction term into a plain least-squares fit. With self_check
    on, the linear-solve residuals of the P and D updates are verified at
    1e-8 relative every iteration.
    """
    if mode not in ("full", "reduced", "frobenius"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode in ("reduced", "frobenius") and (hp.beta != 0.0 or hp.lam != 0.0):
        raise ValueError(f"mode {mode!r} requires beta = 0 and lam = 0")

    pair, codes, weights, rw = init_state(ds, hp)
    Xs, Xbars = _class_views(ds)
    means = MeanMatrices(M=[], Mbar=[])
    for l in range(ds.n_classes):
        M_l, Mbar_l = compute_means(pair.P[l], Xs[l], Xbars[l])
        means.M.append(M_l)
        means.Mbar.append(Mbar_l)

    history = TrainHistory()
    prev_obj = objective_model(ds, pair, weights, hp)
    for _ in range(hp.max_iter):
        P_old = [P_l.copy() for P_l in pair.P]
        S_old = [S_l.copy() for S_l in codes.S]
        D_old = [D_l.copy() for D_l in pair.D]
        W_old = [W_l.copy() for W_l in weights.W]
        for l in range(ds.n_classes):
            X_l, Xbar_l = Xs[l], Xbars[l]
            if self_check:
                A, B = analysis_system(
                    X_l, Xbar_l, codes.S[l], weights.W[l], rw.u[l], rw.h[l],
                    means.M[l], means.Mbar[l], hp,
                )
                pair.P[l] = _solve_right(A, B)
                _check_solve_residual(pair.P[l], A, B, "analysis")
            else:
                pair.P[l] = update_P(
                    X_l, Xbar_l, codes.S[l], weights.W[l], rw.u[l], rw.h[l],
                    means.M[l], means.Mbar[l], hp,
                )
            means.M[l], means.Mbar[l] = compute_means(pair.P[l], X_l, Xbar_l)
            v_eff = np.ones_like(rw.v[l]) if mode == "frobenius" else rw.v[l]
            codes.S[l] = update_S(X_l, pair.D[l], pair.P[l], codes.S[l], rw.u[l], v_eff, hp.tau)
            D_pre = solve_synthesis(X_l, codes.S[l], v_eff, hp.tau)
            if self_check:
                A_d = (codes.S[l] * v_eff) @ codes.S[l].T + hp.tau * np.eye(codes.S[l].shape[0])
                B_d = (X_l * v_eff) @ codes.S[l].T
                _check_solve_residual(D_pre, A_d, B_d, "synthesis")
            pair.D[l] = _normalize_columns(D_pre, X_l.shape[0])
            rw.h[l], rw.u[l], rw.v[l] = update_reweights(X_l, pair.D[l], pair.P[l], codes.S[l], hp.tau)
            if mode == "full":
                weights.W[l] = update_W(X_l, pair.P[l])
        obj = objective_model(ds, pair, weights, hp)
        history.objective_model.append(obj)
        history.objective_relaxed.append(objective_relaxed(ds, pair, codes, weights, hp))
        history.delta_P.append(_assembled_delta(P_old, pair.P))
        history.delta_S.append(_assembled_delta(S_old, codes.S))
        history.delta_D.append(_assembled_delta(D_old, pair.D))
        history.delta_W.append(_assembled_delta(W_old, weights.W))
        history.iterations_run += 1
        if abs(obj - prev_obj) < hp.tol:
            history.converged = True
            break
        prev_obj = obj
    return pair, codes, weights, history
