"""Pure numpy implementation of the matrix-free Hamiltonian apply.

Mirrors ``_apply_ext.pyx`` exactly and is used when the compiled extension
is unavailable (or ``VARQED_PURE_PYTHON=1``).
"""
import numpy as np


def _ladders(v, raise_index, lower_index, sqrt_up, sqrt_down, h):
    """``sum_i h_i a_i v`` and ``sum_i h_i a_i^dag v`` on the truncated basis."""
    pad = np.vstack([v, np.zeros((1, v.shape[1]), dtype=v.dtype)])
    ann = np.zeros_like(v)
    dag = np.zeros_like(v)
    for i in range(len(h)):
        ann += (h[i] * sqrt_up[:, i])[:, None] * pad[raise_index[:, i]]
        dag += (h[i] * sqrt_down[:, i])[:, None] * pad[lower_index[:, i]]
    return ann, dag


def apply_hamiltonian(v, diag, raise_index, lower_index, occupations, h, momentum,
                      c_ap, c_a2, threads=1):
    """``H v`` for ``v`` of shape ``(D, N_a)``.

    ``H = diag + c_ap X (x) p + c_a2 P X^2 P`` with ``X = sum_i h_i (a_i + a_i^dag)``.
    The projected square is applied in normal order,
    ``a a + a^dag a^dag + 2 a^dag a`` (the commutator constant lives in
    ``diag``), which keeps every intermediate inside the truncation.
    """
    occ = occupations.astype(float)
    sqrt_up = np.sqrt(occ + 1.0)
    sqrt_down = np.sqrt(occ)
    ann, dag = _ladders(v, raise_index, lower_index, sqrt_up, sqrt_down, h)
    xv = ann + dag
    ann2, _ = _ladders(ann, raise_index, lower_index, sqrt_up, sqrt_down, h)
    _, dag2 = _ladders(dag + 2.0 * ann, raise_index, lower_index, sqrt_up, sqrt_down, h)
    return diag * v + c_ap * (xv @ momentum.T) + c_a2 * (ann2 + dag2)
