"""Pure-numpy kernel fallback; same call signature as the Cython extension."""
import numpy as np


def pair_mix_3d(diag, partner, off, x, out):
    """out[l,i,r] = diag[i]*x[l,i,r] + off[i]*x[l,partner[i],r]."""
    np.multiply(diag[None, :, None], x, out=out)
    out += off[None, :, None] * x[:, partner, :]
