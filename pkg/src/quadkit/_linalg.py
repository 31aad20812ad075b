"""Factorization kernels used by the row-subselection strategies.

Hand-rolled so pivot tie-breaking (always the lowest index), rank checks and
the pivoting constant are under our control; sizes stay small enough that
cleverness would buy nothing.
"""

import numpy as np

RANK_TOL = 1e-13


def householder_qr_pivot(M, steps=None, rank_tol=RANK_TOL, require_full=True):
    """QR with column pivoting on M (rows x cols), returning the pivot order.

    Returns (pivots, R, rank): `pivots` is the full column permutation,
    `R` the triangularized matrix in permuted order, `rank` the number of
    steps with pivot norm above `rank_tol`.  When ``require_full`` the
    factorization raises if a pivot norm drops below the tolerance before
    `steps` columns are processed.
    """
    R = np.array(M, dtype=float, copy=True)
    nrows, ncols = R.shape
    nsteps = min(nrows, ncols) if steps is None else min(steps, nrows, ncols)
    piv = np.arange(ncols)
    rank = 0
    for j in range(nsteps):
        norms = np.linalg.norm(R[j:, j:], axis=0)
        t = j + int(np.argmax(norms))          # argmax takes the lowest index on ties
        if norms[t - j] < rank_tol:
            if require_full:
                raise ValueError(
                    f"rank deficiency: pivot norm {norms[t - j]:.3e} at step {j}")
            break
        rank += 1
        if t != j:
            R[:, [j, t]] = R[:, [t, j]]
            piv[[j, t]] = piv[[t, j]]
        x = R[j:, j]
        normx = np.linalg.norm(x)
        v = x.copy()
        v[0] += (1.0 if x[0] >= 0 else -1.0) * normx
        vnorm = np.linalg.norm(v)
        if vnorm > 0:
            v /= vnorm
            R[j:, :] -= 2.0 * np.outer(v, v @ R[j:, :])
    return piv, R, rank


def pivoting_constant(R, rank):
    """Largest magnitude entry of R1^{-1} R2 from a pivoted factorization,
    floored at 1 (the constant entering the subselection condition bound)."""
    r = rank
    if r == 0 or R.shape[1] <= r:
        return 1.0
    R1 = np.triu(R[:r, :r])
    R2 = R[:r, r:]
    try:
        C = np.linalg.solve(R1, R2)
    except np.linalg.LinAlgError:
        return 1.0
    return max(1.0, float(np.max(np.abs(C))))


def lu_partial_pivot_rows(A, k):
    """First k pivot rows of Gaussian elimination with partial pivoting."""
    U = np.array(A, dtype=float, copy=True)
    m, n = U.shape
    if k > m:
        raise ValueError("cannot pivot more rows than the matrix has")
    piv = np.arange(m)
    for j in range(min(k, n)):
        t = j + int(np.argmax(np.abs(U[j:, j])))
        if t != j:
            U[[j, t]] = U[[t, j]]
            piv[[j, t]] = piv[[t, j]]
        if U[j, j] != 0.0:
            U[j + 1:, j] /= U[j, j]
            U[j + 1:, j + 1:] -= np.outer(U[j + 1:, j], U[j, j + 1:])
    if k > n:
        # beyond the elimination steps, order remaining rows by size
        rest = piv[n:]
        norms = np.linalg.norm(np.asarray(A, float)[rest], axis=1)
        order = np.argsort(-norms, kind="stable")
        piv = np.concatenate([piv[:n], rest[order]])
    return piv[:k]


def jacobi_svd(A, tol=1e-12, max_sweeps=60):
    """One-sided Jacobi SVD of A (m x n, m >= n): A = U diag(s) V^T.

    Columns are rotated pairwise until all are mutually orthogonal to
    relative tolerance `tol`.
    """
    U = np.array(A, dtype=float, copy=True)
    m, n = U.shape
    if m < n:
        raise ValueError("jacobi_svd expects m >= n")
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = U[:, p] @ U[:, p]
                aqq = U[:, q] @ U[:, q]
                apq = U[:, p] @ U[:, q]
                denom = np.sqrt(app * aqq)
                if denom == 0.0 or abs(apq) <= tol * denom:
                    continue
                off = max(off, abs(apq) / denom)
                zeta = (aqq - app) / (2.0 * apq)
                t = np.sign(zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                up = U[:, p].copy()
                U[:, p] = c * up - s * U[:, q]
                U[:, q] = s * up + c * U[:, q]
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
        if off <= tol:
            break
    else:
        raise RuntimeError(f"jacobi_svd did not converge in {max_sweeps} sweeps")
    sigma = np.linalg.norm(U, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    U = U[:, order]
    V = V[:, order]
    nonzero = sigma > 0
    U[:, nonzero] /= sigma[nonzero]
    return U, sigma, V.T


def nnls(A, b, max_iter=None):
    """Nonnegative least squares min ||Ax - b|| s.t. x >= 0 (active set).

    Returns (x, residual_norm).
    """
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 10 * n
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    resid = b - A @ x
    grad = A.T @ resid
    tol = 10.0 * np.finfo(float).eps * np.linalg.norm(A, 1) * max(m, n)
    iters = 0
    while not passive.all():
        masked = np.where(~passive, grad, -np.inf)
        j = int(np.argmax(masked))
        if masked[j] <= tol:
            break
        passive[j] = True
        while True:
            s = np.zeros(n)
            s[passive], *_ = np.linalg.lstsq(A[:, passive], b, rcond=None)
            if np.all(s[passive] > tol):
                break
            iters += 1
            if iters > max_iter:
                raise RuntimeError("nnls active-set iteration cap exceeded")
            blocking = passive & (s <= tol)
            step = np.min(x[blocking] / (x[blocking] - s[blocking]))
            x = x + step * (s - x)
            passive = passive & (x > tol)
        x = s
        resid = b - A @ x
        grad = A.T @ resid
        iters += 1
        if iters > max_iter:
            raise RuntimeError("nnls active-set iteration cap exceeded")
    return x, float(np.linalg.norm(b - A @ x))


def slog_gram_det(B, rows):
    """(sign, log det) of the Gramian of the selected rows of B."""
    sub = B[np.asarray(rows, int)]
    return np.linalg.slogdet(sub.T @ sub)


def exchange_det_ratio(beta_ii, beta_jj, beta_ij):
    """det(G - b_i b_i^T + b_j b_j^T) / det(G) from the Gramian inverse:
    the two rank-1 corrections combine via the matrix determinant lemma."""
    return (1.0 + beta_jj) * (1.0 - beta_ii) + beta_ij ** 2


def greedy_volume_build(B, k, pref=None):
    """Deterministic greedy volume selection of k rows of B.

    Rank-building phase: pick the row with the largest residual norm against
    the span of those already chosen.  Growth phase (k beyond the column
    count): pick the row with the largest leverage against the selected
    Gramian.  `pref` breaks near-ties (relative 1e-12): among tied rows the
    one with the highest preference wins, then the lowest index.
    """
    B = np.asarray(B, float)
    m, n = B.shape
    if k > m:
        raise ValueError("cannot select more rows than available")
    pref_rank = np.arange(m) if pref is None else np.lexsort((np.arange(m), -np.asarray(pref)))
    rank_of = np.empty(m, dtype=int)
    rank_of[pref_rank] = np.arange(m)

    def pick(values, available):
        vals = np.where(available, values, -np.inf)
        vmax = vals.max()
        if vmax <= 0.0:
            raise ValueError("no admissible row extends the selection")
        eligible = vals >= vmax * (1.0 - 1e-12)
        cand = np.flatnonzero(eligible)
        return int(cand[np.argmin(rank_of[cand])])

    available = np.ones(m, dtype=bool)
    sel = []
    basis = np.zeros((0, n))
    for _ in range(min(k, n)):
        if basis.size:
            resid = B - (B @ basis.T) @ basis
        else:
            resid = B
        norms = np.linalg.norm(resid, axis=1)
        idx = pick(norms, available)
        sel.append(idx)
        available[idx] = False
        r = resid[idx]
        basis = np.vstack([basis, r / np.linalg.norm(r)])
    while len(sel) < k:
        G = B[sel].T @ B[sel]
        Gi = np.linalg.inv(G)
        lev = np.einsum("ij,jl,il->i", B, Gi, B)
        idx = pick(1.0 + lev, available)
        sel.append(idx)
        available[idx] = False
    return np.array(sorted(sel))


def det_swap_ascent(B, selection, renorm=None, gain_tol=1e-10, max_swaps=10_000):
    """Greedy row exchanges increasing log det of the selected Gramian.

    `renorm`, when given, is a positive per-row mass; the objective is then
    log det of the Gramian renormalized by the selected total mass, i.e.
    ``log det(G) - n log(sum of selected masses)``.

    A singular starting Gramian is allowed: while singular, exchange gains
    are evaluated on a regularized determinant that rewards rank repair,
    after which the fast rank-2 update formula takes over.

    Returns (sorted selection, swap count).  Deterministic: the best
    available exchange is applied each round, ties resolved toward the
    lowest candidate row index.
    """
    B = np.asarray(B, float)
    m, n = B.shape
    sel = list(int(i) for i in selection)
    k = len(sel)
    if k >= m:
        return np.array(sorted(sel)), 0

    def gram(rows):
        sub = B[np.asarray(rows, int)]
        return sub.T @ sub

    def numerically_singular(G):
        eigs = np.linalg.eigvalsh(G)
        return eigs[0] <= 1e-12 * max(eigs[-1], 1e-300)

    def regularized(rows):
        # rank-repair proxy: strictly prefers higher-rank selections even
        # when every candidate Gramian is still singular
        G = gram(rows)
        eps = 1e-12 * max(np.trace(G) / n, 1e-300)
        return np.linalg.slogdet(G + eps * np.eye(n))[1]

    swaps = 0
    while numerically_singular(gram(sel)) and swaps < max_swaps:
        gains = np.full((m, k), -np.inf)
        for ii in range(k):
            trial = sel.copy()
            for j in range(m):
                if j in sel:
                    continue
                trial[ii] = j
                gains[j, ii] = regularized(trial)
        j, ii = np.unravel_index(int(np.argmax(gains)), gains.shape)
        if gains[j, ii] <= regularized(sel):
            raise ValueError("no row exchange repairs the singular Gramian")
        sel[ii] = int(j)
        swaps += 1

    for _ in range(max_swaps - swaps):
        sub = B[sel]
        G = sub.T @ sub
        Gi = np.linalg.inv(G)
        BG = B @ Gi                              # m x n
        diag_beta = np.einsum("ij,ij->i", BG, B)  # beta_jj for all rows
        T = BG @ sub.T                           # T[j, i] = beta_{j, sel[i]}
        ratios = ((1.0 + diag_beta)[:, None] * (1.0 - diag_beta[sel])[None, :]
                  + T ** 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            gains = np.log(np.maximum(ratios, 1e-300))
        if renorm is not None:
            tau = renorm[sel].sum()
            tau_new = tau - renorm[sel][None, :] + renorm[:, None]
            gains = gains - n * (np.log(np.maximum(tau_new, 1e-300)) - np.log(tau))
        gains[np.asarray(sel), :] = -np.inf
        flat = int(np.argmax(gains))
        j, ii = np.unravel_index(flat, gains.shape)
        if gains[j, ii] <= gain_tol:
            break
        sel[ii] = int(j)
        swaps += 1
    return np.array(sorted(sel)), swaps
