"""Input coercion for the scikit-learn style estimator."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DomainError
from .model import Sample


def as_sample(X, looks: float) -> Sample:
    """Accept a 1-d array, an (n, 1) array or a Sample and return a Sample."""
    if isinstance(X, Sample):
        if X.looks != float(looks):
            raise DomainError(f"sample has looks={X.looks}, estimator expects {looks}")
        return X
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, ensure_2d=True, ensure_min_samples=1, dtype=float)
    if arr.shape[1] != 1:
        raise DomainError(f"expected a single column of intensities, got shape {arr.shape}")
    return Sample(arr[:, 0], looks)
