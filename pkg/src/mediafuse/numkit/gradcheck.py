"""Central finite-difference gradient checking."""

import numpy as np

from ..errors import NumericError


def numeric_grad(f, params, h=1e-5):
    x = np.array(params, dtype=np.float64)
    flat = x.reshape(-1)
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x.copy())
        flat[i] = orig - h
        fm = f(x.copy())
        flat[i] = orig
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NumericError(f"f is not finite around coordinate {i}")
        grad[i] = (fp - fm) / (2.0 * h)
    return grad.reshape(x.shape)


def grad_check(f, grad, params, h=1e-5):
    """Max over coordinates of ``|analytic - numeric| / max(1, |numeric|)``.

    ``f`` maps a parameter array to a scalar and ``grad`` maps it to the
    analytic gradient of the same shape.
    """
    x = np.array(params, dtype=np.float64)
    analytic = np.asarray(grad(x.copy()), dtype=np.float64)
    if not np.all(np.isfinite(analytic)):
        raise NumericError("analytic gradient is not finite")
    numeric = numeric_grad(f, x, h)
    if analytic.shape != numeric.shape:
        raise NumericError(f"gradient shape {analytic.shape} != params shape {numeric.shape}")
    if numeric.size == 0:
        return 0.0
    err = np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric))
    return float(err.max())


def flatten(arrays):
    if not arrays:
        return np.zeros(0)
    return np.concatenate([np.ravel(a) for a in arrays])


def unflatten_into(flat, arrays):
    """Copy ``flat`` back into ``arrays`` in place, in order."""
    pos = 0
    for a in arrays:
        n = a.size
        a[...] = np.reshape(flat[pos:pos + n], a.shape)
        pos += n
    if pos != len(flat):
        raise NumericError(f"flat vector has {len(flat)} entries, parameters need {pos}")
