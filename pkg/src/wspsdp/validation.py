"""Input coercion and checks shared by the estimator wrappers and the CLI."""
from __future__ import annotations

from os import PathLike

from .exceptions import InstanceFormatError, ParameterError
from .io import instance_from_dict, read_instance
from .model import Instance, VariantConfig, validate_instance


def check_instance(X) -> Instance:
    """Return a validated Instance from an Instance, a document dict or a file path."""
    if isinstance(X, Instance):
        inst = X
    elif isinstance(X, dict):
        inst = instance_from_dict(X)
    elif isinstance(X, (str, PathLike)):
        inst = read_instance(X)
    else:
        raise InstanceFormatError(f"expected an Instance, dict or path, got {type(X).__name__}")
    rep = validate_instance(inst)
    if not rep.ok:
        raise InstanceFormatError("; ".join(rep.messages()))
    return inst


def check_variant(variant) -> VariantConfig:
    return VariantConfig.of(variant)


def check_random_state(seed) -> int:
    """Seeds must be plain nonnegative integers so runs stay reproducible."""
    if seed is None:
        return 0
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ParameterError(f"random_state must be a nonnegative int, got {seed!r}")
    return seed
