"""Pure-numpy implementations of the training hot loops.

Mirrors the compiled extension in ``_core.pyx`` operation for operation;
either backend can serve ``hopqa._kernels``. Gradient accumulation relies on
``np.add.at`` (unbuffered, applied in example order) so both backends add
contributions in the same order.
"""

import numpy as np

NAME = "pure"


def batch_scores(ent_re, ent_im, rel_re, rel_im, h, r, t):
    """Trilinear scores with conjugated tail for a batch of index triples."""
    hre, him = ent_re[h], ent_im[h]
    rre, rim = rel_re[r], rel_im[r]
    tre, tim = ent_re[t], ent_im[t]
    return np.sum(
        hre * rre * tre + him * rre * tim + hre * rim * tim - him * rim * tre,
        axis=1,
    )


def accumulate_grads(
    ent_re, ent_im, rel_re, rel_im,
    h, r, t, coef,
    h_slot, r_slot, t_slot,
    g_ent_re, g_ent_im, g_rel_re, g_rel_im,
):
    """Add ``coef``-weighted score gradients into per-row gradient buffers.

    ``h_slot``/``t_slot`` index rows of the entity gradient buffers and
    ``r_slot`` rows of the relation buffers, so repeated rows accumulate.
    """
    c = coef[:, None]
    hre, him = ent_re[h], ent_im[h]
    rre, rim = rel_re[r], rel_im[r]
    tre, tim = ent_re[t], ent_im[t]

    np.add.at(g_ent_re, h_slot, c * (rre * tre + rim * tim))
    np.add.at(g_ent_im, h_slot, c * (rre * tim - rim * tre))
    np.add.at(g_rel_re, r_slot, c * (hre * tre + him * tim))
    np.add.at(g_rel_im, r_slot, c * (hre * tim - him * tre))
    np.add.at(g_ent_re, t_slot, c * (hre * rre - him * rim))
    np.add.at(g_ent_im, t_slot, c * (him * rre + hre * rim))


def adagrad_update(table, accum, rows, grads, lr, eps):
    """Row-wise AdaGrad step over unique ``rows`` of ``table``."""
    accum[rows] += np.mean(grads * grads, axis=1)
    table[rows] -= lr * grads / (np.sqrt(accum[rows]) + eps)[:, None]
