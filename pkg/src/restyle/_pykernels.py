"""Pure-numpy kernels for the neural infill backend.

Reference implementation of the hot loops; the compiled Cython module
(restyle._ckernels) mirrors these exactly. Shapes: E and W are (V, d)
float64; ids is (n,) int64; weights is (n,) float64 blend toward the mask
embedding; masked is (m,) int64 sorted source positions.
"""

import numpy as np

IMPL = "python"


def _blended(E, ids, weights, mask_id):
    return (1.0 - weights)[:, None] * E[ids] + weights[:, None] * E[mask_id]


def _contexts(E, ids, weights, mask_id, ctrl_id, c):
    """Context feature h_i for every masked position: window mean of blended
    embeddings (excluding position i) plus the control embedding."""
    n = ids.shape[0]
    x = _blended(E, ids, weights, mask_id)
    prefix = np.zeros((n + 1, E.shape[1]))
    np.cumsum(x, axis=0, out=prefix[1:])

    def one(i):
        lo = max(0, i - c)
        hi = min(n, i + c + 1)
        cnt = hi - lo - 1
        if cnt <= 0:
            return E[ctrl_id].copy(), 0
        s = prefix[hi] - prefix[lo] - x[i]
        return s / cnt + E[ctrl_id], cnt

    return x, one


def masked_logits(E, W, ids, weights, masked, ctrl_id, mask_id, c):
    """Logits over the vocabulary at each masked position, shape (m, V)."""
    _, one = _contexts(E, ids, weights, mask_id, ctrl_id, c)
    H = np.stack([one(int(i))[0] for i in masked])
    return H @ W.T


def forward_backward(E, W, ids, weights, masked, targets, ctrl_id, mask_id, c, dE, dW):
    """Mean masked cross-entropy and its gradient, accumulated into dE/dW.

    targets[k] is the supervised token id at masked position masked[k]
    (equal to ids[masked[k]] for plain denoising pairs).
    """
    n = ids.shape[0]
    m = masked.shape[0]
    x, one = _contexts(E, ids, weights, mask_id, ctrl_id, c)
    H = np.empty((m, E.shape[1]))
    cnts = np.empty(m, dtype=np.int64)
    for k, i in enumerate(masked):
        H[k], cnts[k] = one(int(i))
    logits = H @ W.T
    logits -= logits.max(axis=1, keepdims=True)
    expl = np.exp(logits)
    probs = expl / expl.sum(axis=1, keepdims=True)
    loss = -np.mean(np.log(probs[np.arange(m), targets]))

    g = probs.copy()
    g[np.arange(m), targets] -= 1.0
    g /= m
    dW += g.T @ H
    dH = g @ W
    np.add.at(dE, ctrl_id, dH.sum(axis=0))
    dx = np.zeros_like(x)
    for k, i in enumerate(masked):
        if cnts[k] == 0:
            continue
        lo = max(0, int(i) - c)
        hi = min(n, int(i) + c + 1)
        share = dH[k] / cnts[k]
        dx[lo:hi] += share
        dx[int(i)] -= share
    np.add.at(dE, ids, (1.0 - weights)[:, None] * dx)
    np.add.at(dE, mask_id, (weights[:, None] * dx).sum(axis=0))
    return float(loss)
