"""Input validation helpers shared by the estimator-style classes."""

import numpy as np


def check_array(X, name="X", ndim=2, dtype=np.float64):
    """Coerce to a contiguous float array and reject non-finite entries."""
    X = np.asarray(X, dtype=dtype)
    if X.ndim == 1 and ndim == 2:
        X = X.reshape(1, -1)
    if X.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-d, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_labels(y, n_classes=10, name="y"):
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-d, got shape {y.shape}")
    y = y.astype(np.int64)
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValueError(f"{name} values must lie in [0, {n_classes})")
    return y


def check_is_fitted(est, attr):
    if getattr(est, attr, None) is None:
        raise RuntimeError(
            f"{type(est).__name__} is not fitted yet; call fit() first"
        )


class ParamsMixin:
    """get_params/set_params in the scikit-learn style.

    Parameters are the constructor keyword arguments, stored under the
    same names; fitted state uses trailing-underscore attributes.
    """

    def get_params(self):
        import inspect

        names = [
            p.name
            for p in inspect.signature(type(self).__init__).parameters.values()
            if p.name != "self" and p.kind != p.VAR_KEYWORD
        ]
        return {n: getattr(self, n) for n in names}

    def set_params(self, **params):
        valid = self.get_params()
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"unknown parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"
