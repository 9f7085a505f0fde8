import os
import tempfile
from pathlib import Path
from typing import Union

import numpy as np
import torch

PathLike = Union[str, 'os.PathLike[str]']


def filter_none(x):
    """
    Recursively removes key, value pairs or items that is None.
    """
    if isinstance(x, dict):
        return {k: filter_none(v) for k, v in x.items() if v is not None}
    elif isinstance(x, list):
        return [filter_none(i) for i in x if i is not None]
    else:
        return x


def derive_seed(seed: int, *keys: int) -> int:
    """
    Derive an independent 63-bit seed from a base seed and a path of integer keys.

    >>> derive_seed(7, 1) == derive_seed(7, 1)
    True
    >>> derive_seed(7, 1) != derive_seed(7, 2)
    True
    """
    state = np.random.SeedSequence([int(seed), *[int(k) for k in keys]]).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def torch_generator(seed: int) -> torch.Generator:
    gen = torch.Generator(device='cpu')
    gen.manual_seed(int(seed) & 0x7FFF_FFFF_FFFF_FFFF)
    return gen


def atomic_write_bytes(path: PathLike, data: bytes) -> None:
    """ Write data to a temporary file in the destination directory, then rename it into place. """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f'.{target.name}.', dir=str(target.parent))
    try:
        with os.fdopen(fd, 'wb') as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def atomic_write_text(path: PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode('utf-8'))
