"""Counter-based random streams for replicated simulations.

Every replication owns an :class:`RngStream`.  Inside a stream each arm has its
own Philox lane, plus one control lane for policy-side randomness (tie breaks,
random guesses, arm shuffles).  The j-th draw of arm ``a`` is therefore a pure
function of ``(master_seed, replication_index, a, j)``: it does not depend on
how many draws other arms consumed, on chunk sizes, or on worker scheduling.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
# Lane id of the control generator; arm lanes are 0..K-1.
CONTROL_LANE = MASK64


def _philox(master_seed: int, replication_index: int, lane: int) -> np.random.Generator:
    key = np.array([int(master_seed) & MASK64, int(replication_index) & MASK64], dtype=np.uint64)
    # Lanes live in the third counter word, so they sit 2**128 draws apart.
    counter = np.array([0, 0, int(lane) & MASK64, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def derive_seed(master_seed: int, *path: int) -> int:
    """Deterministic 64-bit sub-seed for a position in an experiment grid."""
    ss = np.random.SeedSequence([master_seed & MASK64, *[int(p) & MASK64 for p in path]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class RngStream:
    """Random source of a single replication.

    ``step_counter`` counts the reward draws handed out so far (over all arms).
    Draws that a policy reads ahead and gives back with :meth:`unread` are not
    counted and are served again, in order, by the next :meth:`draw`.
    """

    def __init__(self, master_seed: int, replication_index: int = 0):
        if not 0 <= master_seed <= MASK64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
        if replication_index < 0:
            raise ValueError("replication_index must be nonnegative")
        self.master_seed = int(master_seed)
        self.replication_index = int(replication_index)
        self.step_counter = 0
        self._arm_gens: dict[int, np.random.Generator] = {}
        self._pending: dict[int, np.ndarray] = {}
        self._control: np.random.Generator | None = None

    def __repr__(self):
        return (f"RngStream(master_seed={self.master_seed}, "
                f"replication_index={self.replication_index}, step_counter={self.step_counter})")

    def arm_generator(self, arm: int) -> np.random.Generator:
        gen = self._arm_gens.get(arm)
        if gen is None:
            gen = _philox(self.master_seed, self.replication_index, arm)
            self._arm_gens[arm] = gen
        return gen

    @property
    def control(self) -> np.random.Generator:
        if self._control is None:
            self._control = _philox(self.master_seed, self.replication_index, CONTROL_LANE)
        return self._control

    def draw(self, dist, arm: int, n: int) -> np.ndarray:
        """Next ``n`` rewards of ``arm`` drawn from ``dist``."""
        pending = self._pending.pop(arm, None)
        if pending is None:
            out = dist.draw(self.arm_generator(arm), n)
        elif len(pending) >= n:
            out = pending[:n]
            if len(pending) > n:
                self._pending[arm] = pending[n:]
        else:
            out = np.concatenate([pending, dist.draw(self.arm_generator(arm), n - len(pending))])
        self.step_counter += n
        return out

    def unread(self, arm: int, values: np.ndarray) -> None:
        """Give back the unused tail of the last draw of ``arm``."""
        if len(values) == 0:
            return
        self.step_counter -= len(values)
        rest = self._pending.pop(arm, None)
        self._pending[arm] = values.copy() if rest is None else np.concatenate([values, rest])

    def choice(self, candidates) -> int:
        """Uniform pick from ``candidates`` using the control lane."""
        candidates = np.asarray(candidates)
        if len(candidates) == 1:
            return int(candidates[0])
        return int(candidates[self.control.integers(len(candidates))])
