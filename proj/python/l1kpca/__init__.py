"""L1-norm kernel PCA.

The heavy lifting lives in the compiled ``_l1kpca`` extension; this package
re-exports it and adds :func:`fit_dataset`, a shortcut for the common
standardize, Gram and fit sequence.
"""

from ._l1kpca import *  # noqa: F401,F403
from ._l1kpca import (
    KernelSpec,
    SolverOptions,
    __version__,
    fit,
    gram,
    standardize,
)


def fit_dataset(values, components=1, kernel=None, starts=8, seed=0, threads=0):
    """Standardize ``values``, build the Gram matrix and fit ``components``.

    Returns ``(model, train)`` where ``train`` is the standardized dataset the
    model keeps for scoring new rows.
    """
    spec = kernel if kernel is not None else KernelSpec.linear()
    train = standardize(values)
    options = SolverOptions()
    options.starts = starts
    options.seed = seed
    options.threads = threads
    return fit(gram(spec, train, threads), components, options, train), train
