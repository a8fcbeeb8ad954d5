from typing import Any

import numpy as np

from src.data_access import get_data_access


def get_setting(key: str, default: Any = None) -> Any:
    """
    Load a setting from config.yaml based on the key.

    Args:
        key: The key to lookup (supports nested keys with dots, e.g. "monte_carlo.points")
        default: Returned when the key is missing or null

    Returns:
        The configured value or the default
    """
    result = get_data_access().config
    for k in key.split("."):
        if isinstance(result, dict) and k in result:
            result = result[k]
        else:
            return default
    return default if result is None else result


def derive_seed(master_seed: int, *keys: int) -> int:
    """
    Derive an independent 64-bit seed from a master seed and a path of keys.

    The same (master_seed, keys) always gives the same seed, so a window or
    replicate block draws the same numbers whatever order it is evaluated in.
    """
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
