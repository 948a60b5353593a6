"""Backend selection for the SGNS hot loops.

The compiled ``_kernels`` extension is used when importable; otherwise, or when
``ITEMVEC_PURE_PYTHON`` is set to a non-empty value, the pure-Python
``_pykernels`` module is used. Both expose the same functions.
"""
import os

if os.environ.get("ITEMVEC_PURE_PYTHON"):
    from . import _pykernels as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        from . import _pykernels as _impl

BACKEND = _impl.BACKEND
sigmoid = _impl.sigmoid
sgns_update = _impl.sgns_update
alias_sample = _impl.alias_sample
splitmix_stream = _impl.splitmix_stream
train_sets = _impl.train_sets

__all__ = ["BACKEND", "sigmoid", "sgns_update", "alias_sample", "splitmix_stream", "train_sets"]
