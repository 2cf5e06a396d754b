"""Counter-based random substreams.

Every unit of work (a game, a training episode, a shuffle pass) gets its own
Philox stream keyed by (master_seed, stream_index).  Stream i is the same no
matter how many streams were consumed before it, which is what makes campaign
results independent of worker count and merge order.
"""

import numpy as np

# Index-space partition so different purposes never collide on a key.
STREAM_INIT = 2**63          # network parameter initialization
STREAM_OPT_BASE = 2**62      # minibatch shuffling, one stream per batch
# episodes / games use plain indices counted from 0


def substream(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for (master_seed, index); same pair, same stream."""
    key = np.array([master_seed % 2**64, index % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
